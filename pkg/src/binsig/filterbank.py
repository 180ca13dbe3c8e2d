"""Bank of second-order Butterworth bandpass filters.

Each band is a single biquad designed by bilinear transform with prewarped
edges, so the -3 dB points land exactly on the requested digital frequencies
and the gain is identically zero at DC and Nyquist.  Application is causal
direct-form-II-transposed with zero initial state per trial, channel and band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

COEFFS_PER_BAND = 5  # b0, b1, b2, a1, a2
COEFF_BYTES = 2  # per-coefficient storage convention for footprint accounting


@dataclass(frozen=True)
class BandSpec:
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not 0.0 < self.low_hz < self.high_hz:
            raise ValueError("band edges must satisfy 0 < low < high")


def default_bands() -> list[BandSpec]:
    """The 43-band layout over 4-40 Hz.

    Widths 2 Hz stepped by 2 (4-6 ... 38-40, 18 bands), 4 Hz stepped by 2
    (4-8 ... 36-40, 17 bands) and 8 Hz stepped by 4 (4-12 ... 32-40, 8 bands).
    """
    bands = []
    for low in range(4, 39, 2):
        bands.append(BandSpec(float(low), float(low + 2)))
    for low in range(4, 37, 2):
        bands.append(BandSpec(float(low), float(low + 4)))
    for low in range(4, 33, 4):
        bands.append(BandSpec(float(low), float(low + 8)))
    return bands


def design_bandpass(band: BandSpec, sample_rate: float) -> np.ndarray:
    """Biquad coefficients (b0, b1, b2, a1, a2) for one band.

    Bilinear transform of the analog second-order Butterworth bandpass with
    both edges prewarped; raises if an edge reaches the Nyquist frequency.
    """
    if not sample_rate > 0.0:
        raise ValueError("sample_rate must be positive")
    nyquist = sample_rate / 2.0
    if band.high_hz >= nyquist:
        raise ValueError(
            "band edge %.6g Hz at or above Nyquist %.6g Hz" % (band.high_hz, nyquist)
        )
    w1 = np.tan(np.pi * band.low_hz / sample_rate)
    w2 = np.tan(np.pi * band.high_hz / sample_rate)
    w0sq = w1 * w2
    bw = w2 - w1
    a0 = 1.0 + bw + w0sq
    coeffs = np.array(
        [
            bw / a0,
            0.0,
            -bw / a0,
            2.0 * (w0sq - 1.0) / a0,
            (1.0 - bw + w0sq) / a0,
        ]
    )
    a1, a2 = coeffs[3], coeffs[4]
    if not (abs(a2) < 1.0 and abs(a1) < 1.0 + a2):
        raise ValueError("unstable design for band %r" % (band,))
    return coeffs


@dataclass(frozen=True)
class FilterBank:
    sample_rate: float
    bands: tuple[BandSpec, ...]
    coeffs: np.ndarray  # (n_bands, 5)

    @property
    def n_bands(self) -> int:
        return len(self.bands)


def design_bank(bands: list[BandSpec] | None, sample_rate: float) -> FilterBank:
    """Design every band at the given rate; identical inputs give identical
    coefficients."""
    if bands is None:
        bands = default_bands()
    if not bands:
        raise ValueError("need at least one band")
    coeffs = np.stack([design_bandpass(b, sample_rate) for b in bands])
    return FilterBank(sample_rate=float(sample_rate), bands=tuple(bands), coeffs=coeffs)


def apply_bank(bank: FilterBank, samples: np.ndarray) -> np.ndarray:
    """Filter a (n_ch, n_s) trial into a (n_bands, n_ch, n_s) array."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError("samples must be 2-d (channels x samples)")
    return kernels.biquad_chain(samples, bank.coeffs)


def gain_at(coeffs: np.ndarray, freq_hz: float, sample_rate: float) -> float:
    """Magnitude response of one biquad at a frequency, by direct evaluation
    of the transfer function on the unit circle."""
    z = np.exp(-2j * np.pi * freq_hz / sample_rate)
    b0, b1, b2, a1, a2 = coeffs
    h = (b0 + b1 * z + b2 * z * z) / (1.0 + a1 * z + a2 * z * z)
    return float(np.abs(h))
