"""Butterworth biquad design and bank application."""

import numpy as np
import pytest

from binsig.filterbank import (
    BandSpec,
    apply_bank,
    default_bands,
    design_bandpass,
    design_bank,
    gain_at,
)

FS = 250.0


def test_default_band_count():
    bands = default_bands()
    assert len(bands) == 43
    widths = sorted({b.high_hz - b.low_hz for b in bands})
    assert widths == [2.0, 4.0, 8.0]


def test_band_edges_land_at_half_power():
    for band in (BandSpec(8.0, 12.0), BandSpec(4.0, 6.0), BandSpec(26.0, 30.0)):
        coeffs = design_bandpass(band, FS)
        np.testing.assert_allclose(gain_at(coeffs, band.low_hz, FS), 2**-0.5, rtol=1e-9)
        np.testing.assert_allclose(gain_at(coeffs, band.high_hz, FS), 2**-0.5, rtol=1e-9)


def test_gain_zero_at_dc_and_nyquist():
    coeffs = design_bandpass(BandSpec(8.0, 12.0), FS)
    assert gain_at(coeffs, 0.0, FS) < 1e-14
    assert gain_at(coeffs, FS / 2.0, FS) < 1e-14


def test_passband_above_stopband():
    band = BandSpec(8.0, 12.0)
    coeffs = design_bandpass(band, FS)
    center = np.sqrt(band.low_hz * band.high_hz)
    assert gain_at(coeffs, center, FS) > 0.9
    assert gain_at(coeffs, 40.0, FS) < 0.3


def test_all_default_bands_stable_at_250hz():
    bank = design_bank(None, FS)
    assert bank.n_bands == 43
    a1 = bank.coeffs[:, 3]
    a2 = bank.coeffs[:, 4]
    assert np.all(np.abs(a2) < 1.0)
    assert np.all(np.abs(a1) < 1.0 + a2)


def test_band_at_nyquist_rejected():
    with pytest.raises(ValueError, match="Nyquist"):
        design_bandpass(BandSpec(100.0, 125.0), FS)


def test_invalid_edges_rejected():
    with pytest.raises(ValueError, match="band edges"):
        BandSpec(12.0, 8.0)
    with pytest.raises(ValueError, match="band edges"):
        BandSpec(0.0, 8.0)


def test_apply_bank_shape_and_linearity():
    rng = np.random.default_rng(5)
    bank = design_bank([BandSpec(6.0, 10.0), BandSpec(10.0, 14.0)], FS)
    x = rng.standard_normal((4, 100))
    y = apply_bank(bank, x)
    assert y.shape == (2, 4, 100)
    # Rounding inside the recurrence differs between x and 3x, so linearity
    # holds to roundoff, not bitwise.
    np.testing.assert_allclose(apply_bank(bank, 3.0 * x), 3.0 * y, rtol=1e-12, atol=1e-13)


def test_apply_bank_deterministic():
    rng = np.random.default_rng(6)
    bank = design_bank([BandSpec(6.0, 10.0)], FS)
    x = rng.standard_normal((2, 64))
    np.testing.assert_array_equal(apply_bank(bank, x), apply_bank(bank, x))


def test_sine_in_band_passes_out_of_band_attenuates():
    bank = design_bank([BandSpec(8.0, 12.0)], FS)
    t = np.arange(2000) / FS
    in_band = np.sin(2 * np.pi * 10.0 * t)[None, :]
    out_band = np.sin(2 * np.pi * 45.0 * t)[None, :]
    # Skip the transient, compare steady-state RMS.
    y_in = apply_bank(bank, in_band)[0, 0, 500:]
    y_out = apply_bank(bank, out_band)[0, 0, 500:]
    assert np.sqrt(np.mean(y_in**2)) > 0.6
    assert np.sqrt(np.mean(y_out**2)) < 0.1


def test_design_bank_identical_runs():
    a = design_bank(None, FS)
    b = design_bank(None, FS)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
