"""Kernel-level checks, including numba-vs-numpy agreement where both exist."""

import numpy as np
import pytest

from binsig import kernels
from binsig._backend import NUMBA_ENABLED, backend_name


def test_backend_name_is_known():
    assert backend_name() in ("numba", "numpy")


@pytest.mark.parametrize("dim", [1, 7, 63, 64, 65, 128, 1000])
def test_pack_unpack_roundtrip(dim):
    rng = np.random.default_rng(dim)
    bits = rng.integers(0, 2, size=dim).astype(bool)
    words = kernels.pack_bits(bits)
    assert words.dtype == np.uint64
    assert words.shape == ((dim + 63) // 64,)
    np.testing.assert_array_equal(kernels.unpack_bits(words, dim), bits)


def test_pack_bits_padding_is_zero():
    bits = np.ones(70, dtype=bool)
    words = kernels.pack_bits(bits)
    # 70 bits leave 58 padding lanes in the second word.
    assert int(words[1] >> np.uint64(6)) == 0


def test_hash_u64_matches_scalar_reference():
    # Scalar splitmix64-style finalizer over python ints as the oracle.
    mask = (1 << 64) - 1

    def mix(key, counter):
        # Counters enter the stream 1-based so counter 0 does not hash the
        # bare key.
        z = (key + (counter + 1) * 0x9E3779B97F4A7C15) & mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    key = kernels.stream_key(42)
    counters = np.arange(200, dtype=np.uint64)
    got = kernels.hash_u64(key, counters)
    want = [mix(int(key), c) for c in range(200)]
    np.testing.assert_array_equal(got, np.array(want, dtype=np.uint64))


def test_stream_key_distinct_across_seeds():
    keys = {int(kernels.stream_key(s)) for s in range(64)}
    assert len(keys) == 64


def test_ternary_thresholds_empirical_frequencies():
    key = kernels.stream_key(3)
    u = kernels.hash_u64(key, np.arange(200_000, dtype=np.uint64))
    t0, t1 = kernels.ternary_thresholds(0.9)
    nonzero = u >= t0
    frac_nonzero = nonzero.mean()
    assert abs(frac_nonzero - 0.1) < 0.01
    neg = (u[nonzero] >= t1).mean()
    assert abs(neg - 0.5) < 0.02


def test_ternary_thresholds_sparsity_zero_keeps_everything():
    t0, _ = kernels.ternary_thresholds(0.0)
    assert int(t0) == 0


def test_hamming_many_matches_unpacked_popcount():
    rng = np.random.default_rng(9)
    dim = 300
    a_bits = rng.integers(0, 2, size=(5, dim)).astype(bool)
    b_bits = rng.integers(0, 2, size=(3, dim)).astype(bool)
    a = np.stack([kernels.pack_bits(r) for r in a_bits])
    b = np.stack([kernels.pack_bits(r) for r in b_bits])
    got = kernels.hamming_many(a, b)
    want = (a_bits[:, None, :] != b_bits[None, :, :]).sum(axis=2)
    np.testing.assert_array_equal(got, want)


def test_biquad_chain_matches_scalar_recurrence():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 40))
    coeffs = np.array([[0.2, 0.0, -0.2, -1.1, 0.4], [0.05, 0.0, -0.05, -1.6, 0.7]])
    got = kernels.biquad_chain(x, coeffs)
    assert got.shape == (2, 2, 40)
    for b in range(2):
        b0, b1, b2, a1, a2 = coeffs[b]
        for ch in range(2):
            s1 = s2 = 0.0
            for k in range(40):
                y = b0 * x[ch, k] + s1
                s1 = b1 * x[ch, k] - a1 * y + s2
                s2 = b2 * x[ch, k] - a2 * y
                np.testing.assert_allclose(got[b, ch, k], y, rtol=1e-12, atol=1e-14)


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba backend not active")
class TestCrossBackend:
    """The compiled kernels must agree with the plain-numpy fallbacks."""

    def test_hamming_identical(self):
        rng = np.random.default_rng(5)
        a = rng.integers(0, 1 << 63, size=(20, 16), dtype=np.uint64)
        b = rng.integers(0, 1 << 63, size=(4, 16), dtype=np.uint64)
        out = np.empty((20, 4), dtype=np.int64)
        kernels.hamming_many_nb(a, b, out)
        np.testing.assert_array_equal(out, kernels._hamming_many_np(a, b))

    def test_project_bits_identical(self):
        rng = np.random.default_rng(6)
        feats = rng.standard_normal(128)
        key = kernels.stream_key(11)
        t0, t1 = kernels.ternary_thresholds(0.9)
        dim = 1000
        words_nb = np.zeros((dim + 63) // 64, dtype=np.uint64)
        kernels.project_bits_nb(feats, dim, key, t0, t1, words_nb)
        words_np = np.zeros((dim + 63) // 64, dtype=np.uint64)
        kernels._project_bits_np(feats, dim, key, t0, t1, words_np)
        np.testing.assert_array_equal(words_nb, words_np)

    def test_biquad_close(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((3, 200))
        coeffs = np.array([[0.2, 0.0, -0.2, -1.1, 0.4]])
        out_nb = np.empty((1, 3, 200))
        kernels.biquad_chain_nb(x, coeffs, out_nb)
        out_np = np.empty((1, 3, 200))
        kernels._biquad_chain_np(x, coeffs, out_np)
        np.testing.assert_allclose(out_nb, out_np, rtol=1e-12, atol=1e-14)

    def test_dcd_close(self):
        rng = np.random.default_rng(8)
        x = np.where(rng.standard_normal((60, 80)) > 0, 1.0, -1.0)
        y = np.where(rng.integers(0, 2, size=60) > 0, 1.0, -1.0)
        w_nb, a_nb, gap_nb, ep_nb = kernels.dcd_solve_nb(x, y, 1.0, 1e-6, 500)
        w_np, a_np, gap_np, ep_np = kernels._dcd_np(x, y, 1.0, 1e-6, 500)
        np.testing.assert_allclose(w_nb, w_np, rtol=1e-9, atol=1e-11)
        np.testing.assert_allclose(a_nb, a_np, rtol=1e-9, atol=1e-11)
        assert ep_nb == ep_np


def test_gram_matrix_symmetric_and_correct():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((6, 50))
    g = kernels.gram_matrix(x)
    assert np.array_equal(g, g.T)
    np.testing.assert_allclose(g, x @ x.T, rtol=1e-12, atol=1e-12)
