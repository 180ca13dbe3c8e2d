"""Hot numeric kernels, each with a numba implementation and a numpy fallback.

The public names (``hamming_many``, ``project_bits``, ``biquad_chain``,
``dcd_solve``) dispatch to whichever implementation the backend selected at
import time.  The per-backend variants stay importable (``*_nb`` / ``*_np``)
so the benchmark and the cross-path tests can compare them directly.
``gram_matrix`` is the one hot routine that is not a dispatch target: BLAS
wins at its shapes on either backend.

Integer kernels (counter hash, Hamming) are bit-identical across backends.
Float kernels accumulate in ascending index order on the numba path; the numpy
fallback uses numpy's blocked reductions, so the two backends may disagree in
the final bits of a sum (never within one backend).
"""

from __future__ import annotations

import numpy as np

from ._backend import NUMBA_ENABLED

WORD_BITS = 64

_MASK64 = (1 << 64) - 1

# splitmix64 constants: the stream value for counter c is mix(key + (c+1)*GOLD)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_ONE = np.uint64(1)

# SWAR popcount constants
_C55 = np.uint64(0x5555555555555555)
_C33 = np.uint64(0x3333333333333333)
_C0F = np.uint64(0x0F0F0F0F0F0F0F0F)
_C01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


def stream_key(seed: int) -> np.uint64:
    """Mix a 32-bit seed into the 64-bit key of the counter hash stream."""
    z = int(seed) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return np.uint64(z)


def ternary_thresholds(sparsity: float) -> tuple[np.uint64, np.uint64]:
    """Integer cut points on the u64 stream for the {0, +1, -1} draw.

    A stream value u maps to 0 when u < t0, to +1 when t0 <= u < t1 and to -1
    otherwise, so P(0) = sparsity and the remaining mass splits evenly.
    """
    if not 0.0 <= sparsity < 1.0:
        raise ValueError("sparsity must be in [0, 1)")
    t0 = int(sparsity * 2.0**64)
    if t0 > _MASK64:
        t0 = _MASK64
    t1 = t0 + ((1 << 64) - t0) // 2
    return np.uint64(t0), np.uint64(t1 & _MASK64)


def hash_u64(key: np.uint64, counters: np.ndarray) -> np.ndarray:
    """Vectorized counter hash; identical values to the kernel-internal hash."""
    z = np.uint64(key) + (counters.astype(np.uint64) + _ONE) * _GOLD
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


# ---------------------------------------------------------------------------
# bit packing


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 vector into uint64 words, bit i at word i//64, lane i%64.

    Padding bits in the final word are always zero.
    """
    d = bits.shape[0]
    n_words = (d + 63) // 64
    packed = np.packbits(np.ascontiguousarray(bits, dtype=np.uint8), bitorder="little")
    buf = np.zeros(n_words * 8, dtype=np.uint8)
    buf[: packed.shape[0]] = packed
    return buf.view(np.uint64)


def unpack_bits(words: np.ndarray, d: int) -> np.ndarray:
    """Inverse of pack_bits; returns a uint8 vector of length d."""
    return np.unpackbits(words.view(np.uint8), count=d, bitorder="little")


# ---------------------------------------------------------------------------
# Hamming distance (XOR + popcount over packed words)


def _hamming_many_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n_words = a.shape
    k = b.shape[0]
    out = np.empty((m, k), dtype=np.int64)
    batch = max(1, 2_000_000 // max(k * n_words, 1))
    for s in range(0, m, batch):
        e = min(s + batch, m)
        x = a[s:e, None, :] ^ b[None, :, :]
        out[s:e] = np.bitwise_count(x).sum(axis=2, dtype=np.int64)
    return out


def _hamming_many_loop(a, b, out):
    m = a.shape[0]
    k = b.shape[0]
    n_words = a.shape[1]
    for i in range(m):
        for j in range(k):
            total = np.uint64(0)
            for w in range(n_words):
                x = a[i, w] ^ b[j, w]
                x = x - ((x >> _S1) & _C55)
                x = (x & _C33) + ((x >> _S2) & _C33)
                x = (x + (x >> _S4)) & _C0F
                total += (x * _C01) >> _S56
            out[i, j] = np.int64(total)


# ---------------------------------------------------------------------------
# sparse/dense bipolar projection followed by sign binarization


def _project_bits_loop(feats, dim, key, t0, t1, out_words):
    n_f = feats.shape[0]
    for i in range(dim):
        base = np.uint64(i) * np.uint64(n_f)
        acc = 0.0
        for j in range(n_f):
            z = key + (base + np.uint64(j) + _ONE) * _GOLD
            z = (z ^ (z >> _S30)) * _MIX1
            z = (z ^ (z >> _S27)) * _MIX2
            z = z ^ (z >> _S31)
            if z >= t0:
                if z < t1:
                    acc += feats[j]
                else:
                    acc -= feats[j]
        if acc >= 0.0:
            out_words[i >> 6] |= _ONE << np.uint64(i & 63)


def _project_bits_np(feats, dim, key, t0, t1, out_words):
    n_f = feats.shape[0]
    cols = np.arange(1, n_f + 1, dtype=np.uint64)
    bits = np.zeros(dim, dtype=np.uint8)
    block = max(1, 4_000_000 // max(n_f, 1))
    for r0 in range(0, dim, block):
        r1 = min(r0 + block, dim)
        rows = np.arange(r0, r1, dtype=np.uint64) * np.uint64(n_f)
        z = key + (rows[:, None] + cols[None, :]) * _GOLD
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z ^= z >> _S31
        signs = np.where(z >= t1, -1.0, 1.0)
        signs[z < t0] = 0.0
        acc = signs @ feats
        bits[r0:r1] = acc >= 0.0
    out_words[:] = pack_bits(bits)


# ---------------------------------------------------------------------------
# cascade of second-order bandpass sections (direct form II transposed)


def _biquad_chain_loop(x, coeffs, out):
    n_bands = coeffs.shape[0]
    n_ch = x.shape[0]
    n_s = x.shape[1]
    for b in range(n_bands):
        b0 = coeffs[b, 0]
        b1 = coeffs[b, 1]
        b2 = coeffs[b, 2]
        a1 = coeffs[b, 3]
        a2 = coeffs[b, 4]
        for c in range(n_ch):
            s1 = 0.0
            s2 = 0.0
            for n in range(n_s):
                xn = x[c, n]
                yn = b0 * xn + s1
                s1 = (b1 * xn + s2) - a1 * yn
                s2 = b2 * xn - a2 * yn
                out[b, c, n] = yn


def _biquad_chain_np(x, coeffs, out):
    n_bands = coeffs.shape[0]
    n_ch = x.shape[0]
    n_s = x.shape[1]
    for b in range(n_bands):
        b0, b1, b2, a1, a2 = coeffs[b]
        s1 = np.zeros(n_ch)
        s2 = np.zeros(n_ch)
        y = out[b]
        for n in range(n_s):
            xn = x[:, n]
            yn = b0 * xn + s1
            s1 = (b1 * xn + s2) - a1 * yn
            s2 = b2 * xn - a2 * yn
            y[:, n] = yn


# ---------------------------------------------------------------------------
# dual coordinate descent for the bias-free L2-regularized hinge SVM


def _dcd_loop(x, y, c_bound, tol, max_epochs):
    n = x.shape[0]
    d = x.shape[1]
    w = np.zeros(d)
    alpha = np.zeros(n)
    qii = np.zeros(n)
    for i in range(n):
        q = 0.0
        for j in range(d):
            q += x[i, j] * x[i, j]
        qii[i] = q
    gap = np.inf
    epochs = 0
    for _ in range(max_epochs):
        epochs += 1
        for i in range(n):
            if qii[i] == 0.0:
                continue
            g = 0.0
            for j in range(d):
                g += w[j] * x[i, j]
            g = g * y[i] - 1.0
            a_new = alpha[i] - g / qii[i]
            if a_new < 0.0:
                a_new = 0.0
            elif a_new > c_bound:
                a_new = c_bound
            delta = (a_new - alpha[i]) * y[i]
            if delta != 0.0:
                for j in range(d):
                    w[j] += delta * x[i, j]
                alpha[i] = a_new
        wsq = 0.0
        for j in range(d):
            wsq += w[j] * w[j]
        hinge = 0.0
        asum = 0.0
        for i in range(n):
            m = 0.0
            for j in range(d):
                m += w[j] * x[i, j]
            slack = 1.0 - y[i] * m
            if slack > 0.0:
                hinge += slack
            asum += alpha[i]
        gap = wsq + c_bound * hinge - asum
        if gap <= tol:
            break
    return w, alpha, gap, epochs


def _dcd_np(x, y, c_bound, tol, max_epochs):
    n, _ = x.shape
    w = np.zeros(x.shape[1])
    alpha = np.zeros(n)
    qii = np.einsum("ij,ij->i", x, x)
    gap = np.inf
    epochs = 0
    for _ in range(max_epochs):
        epochs += 1
        for i in range(n):
            if qii[i] == 0.0:
                continue
            g = y[i] * float(x[i] @ w) - 1.0
            a_new = min(max(alpha[i] - g / qii[i], 0.0), c_bound)
            delta = (a_new - alpha[i]) * y[i]
            if delta != 0.0:
                w += delta * x[i]
                alpha[i] = a_new
        slack = 1.0 - y * (x @ w)
        gap = float(w @ w) + c_bound * float(np.clip(slack, 0.0, None).sum()) - float(alpha.sum())
        if gap <= tol:
            break
    return w, alpha, gap, epochs


# ---------------------------------------------------------------------------
# symmetric Gram matrix of a trial block


def gram_matrix(x: np.ndarray) -> np.ndarray:
    """X X^T with exact symmetry (lower triangle mirrored).

    Runs on BLAS under both backends: at covariance shapes (few channels,
    hundreds of samples) the matmul beats a compiled triangle loop, so this
    is not a numba kernel.
    """
    g = x @ x.T
    lower = np.tril(g)
    return lower + np.tril(g, -1).T


# ---------------------------------------------------------------------------
# dispatch

if NUMBA_ENABLED:
    from numba import njit

    hamming_many_nb = njit(cache=True, nogil=True)(_hamming_many_loop)
    project_bits_nb = njit(cache=True, nogil=True)(_project_bits_loop)
    biquad_chain_nb = njit(cache=True, nogil=True)(_biquad_chain_loop)
    dcd_solve_nb = njit(cache=True, nogil=True)(_dcd_loop)

    def hamming_many(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty((a.shape[0], b.shape[0]), dtype=np.int64)
        hamming_many_nb(a, b, out)
        return out

    def project_bits(feats, dim, key, t0, t1) -> np.ndarray:
        out = np.zeros((dim + 63) // 64, dtype=np.uint64)
        project_bits_nb(feats, dim, key, t0, t1, out)
        return out

    def biquad_chain(x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        out = np.empty((coeffs.shape[0], x.shape[0], x.shape[1]))
        biquad_chain_nb(x, coeffs, out)
        return out

    dcd_solve = dcd_solve_nb

else:

    def hamming_many(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _hamming_many_np(a, b)

    def project_bits(feats, dim, key, t0, t1) -> np.ndarray:
        out = np.zeros((dim + 63) // 64, dtype=np.uint64)
        _project_bits_np(feats, dim, key, t0, t1, out)
        return out

    def biquad_chain(x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        out = np.empty((coeffs.shape[0], x.shape[0], x.shape[1]))
        _biquad_chain_np(x, coeffs, out)
        return out

    dcd_solve = _dcd_np
