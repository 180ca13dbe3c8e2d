"""SPD covariance features: regularized covariance, matrix functions through
the package eigensolver, the Karcher-flow geometric mean, and norm-preserving
half-vectorization of tangent matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .eig import EigenDecomposition, eigh_symmetric


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive definite matrix stored as a packed lower triangle.

    ``packed`` holds the lower triangle in row-major order:
    (0,0), (1,0), (1,1), (2,0), ...  Construction certifies positive
    definiteness via a Cholesky factorization.
    """

    n: int
    packed: np.ndarray

    @classmethod
    def from_full(cls, a: np.ndarray, validate: bool = True) -> "SpdMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        n = a.shape[0]
        if validate:
            scale = float(np.max(np.abs(a))) if a.size else 0.0
            if float(np.max(np.abs(a - a.T))) > 1e-10 * (1.0 + scale):
                raise ValueError("matrix must be symmetric")
            if not np.all(np.isfinite(a)):
                raise ValueError("matrix must be finite")
            try:
                np.linalg.cholesky(a)
            except np.linalg.LinAlgError:
                raise ValueError("matrix must be positive definite") from None
        rows, cols = np.tril_indices(n)
        return cls(n=n, packed=a[rows, cols].copy())

    def full(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        rows, cols = np.tril_indices(self.n)
        out[rows, cols] = self.packed
        out[cols, rows] = self.packed
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.packed, other.packed)


def covariance(x: np.ndarray, alpha: float = 0.1) -> SpdMatrix:
    """Shrinkage-regularized covariance C = (X X^T + alpha I) / (n_s - 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("samples must be a 2-d array (channels x samples)")
    n_ch, n_s = x.shape
    if n_s < 2:
        raise ValueError("need at least 2 samples per channel")
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    g = kernels.gram_matrix(x)
    g[np.diag_indices(n_ch)] += alpha
    g /= n_s - 1.0
    return SpdMatrix.from_full(g)


def eigendecompose(a: np.ndarray | SpdMatrix) -> EigenDecomposition:
    if isinstance(a, SpdMatrix):
        a = a.full()
    return eigh_symmetric(a)


def _apply_spectral(a: np.ndarray, fn) -> np.ndarray:
    dec = eigh_symmetric(a)
    vals = fn(dec.values)
    out = (dec.vectors * vals) @ dec.vectors.T
    return (out + out.T) / 2.0


def logm(a: np.ndarray | SpdMatrix) -> np.ndarray:
    """Matrix logarithm of an SPD matrix; returns a symmetric matrix."""
    m = a.full() if isinstance(a, SpdMatrix) else np.asarray(a, dtype=np.float64)
    dec = eigh_symmetric(m)
    if dec.values[0] <= 0.0:
        raise ValueError("matrix must be positive definite")
    out = (dec.vectors * np.log(dec.values)) @ dec.vectors.T
    return (out + out.T) / 2.0


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix; returns an SPD matrix."""
    return _apply_spectral(np.asarray(a, dtype=np.float64), np.exp)


def sqrtm(a: np.ndarray | SpdMatrix) -> np.ndarray:
    m = a.full() if isinstance(a, SpdMatrix) else np.asarray(a, dtype=np.float64)
    dec = eigh_symmetric(m)
    if dec.values[0] <= 0.0:
        raise ValueError("matrix must be positive definite")
    out = (dec.vectors * np.sqrt(dec.values)) @ dec.vectors.T
    return (out + out.T) / 2.0


def inv_sqrtm(a: np.ndarray | SpdMatrix) -> np.ndarray:
    m = a.full() if isinstance(a, SpdMatrix) else np.asarray(a, dtype=np.float64)
    dec = eigh_symmetric(m)
    if dec.values[0] <= 0.0:
        raise ValueError("matrix must be positive definite")
    out = (dec.vectors / np.sqrt(dec.values)) @ dec.vectors.T
    return (out + out.T) / 2.0


@dataclass(frozen=True)
class GeometricMeanResult:
    matrix: SpdMatrix
    iterations: int
    converged: bool
    residual: float


def geometric_mean(
    mats: Sequence[SpdMatrix],
    tol: float = 1e-8,
    max_iter: int = 50,
) -> GeometricMeanResult:
    """Karcher (Frechet) mean of SPD matrices by fixed-point iteration.

    Starts from the arithmetic mean and repeats
    G <- G^1/2 expm(mean_i logm(G^-1/2 C_i G^-1/2)) G^1/2
    until the Frobenius norm of the mean tangent drops to ``tol`` or
    ``max_iter`` update steps have been taken (``converged`` reports which).
    """
    if len(mats) == 0:
        raise ValueError("need at least one matrix")
    n = mats[0].n
    for m in mats:
        if m.n != n:
            raise ValueError("matrices must share a common size")
    fulls = [m.full() for m in mats]
    g = np.zeros((n, n))
    for f in fulls:
        g += f
    g /= len(fulls)
    iterations = 0
    converged = False
    residual = np.inf
    while True:
        g_half = sqrtm(g)
        g_ihalf = inv_sqrtm(g)
        tangent = np.zeros((n, n))
        for f in fulls:
            white = g_ihalf @ f @ g_ihalf
            tangent += logm((white + white.T) / 2.0)
        tangent /= len(fulls)
        residual = float(np.linalg.norm(tangent))
        if residual <= tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        step = g_half @ expm(tangent) @ g_half
        g = (step + step.T) / 2.0
        iterations += 1
    return GeometricMeanResult(
        matrix=SpdMatrix.from_full(g),
        iterations=iterations,
        converged=converged,
        residual=residual,
    )


def half_vectorize(s: np.ndarray) -> np.ndarray:
    """Norm-preserving half-vectorization of a symmetric matrix.

    Diagonal entries enter unscaled, strict lower-triangle entries scaled by
    sqrt(2), laid out in row-major lower-triangle order, so the Euclidean norm
    of the vector equals the Frobenius norm of the matrix.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("matrix must be square")
    n = s.shape[0]
    rows, cols = np.tril_indices(n)
    v = s[rows, cols].copy()
    v[rows != cols] *= np.sqrt(2.0)
    return v


def riemannian_features(
    covs: Sequence[SpdMatrix],
    ref_inv_sqrts: Sequence[np.ndarray],
) -> np.ndarray:
    """Concatenated tangent-space features across bands.

    Per band: whiten the covariance with the reference inverse square root,
    take the matrix log, half-vectorize; concatenate in band order.
    """
    if len(covs) != len(ref_inv_sqrts):
        raise ValueError("need one reference per band")
    parts = []
    for c, w in zip(covs, ref_inv_sqrts):
        white = w @ c.full() @ w
        parts.append(half_vectorize(logm((white + white.T) / 2.0)))
    return np.concatenate(parts)


def n_feature_pairs(n_ch: int) -> int:
    """Length of a half-vectorized n_ch x n_ch symmetric matrix."""
    return n_ch * (n_ch + 1) // 2


@dataclass(frozen=True)
class ReferenceSet:
    """Per-band whitening references fit on training covariances."""

    refs: tuple[SpdMatrix, ...]
    converged: tuple[bool, ...]

    def inv_sqrts(self) -> list[np.ndarray]:
        return [inv_sqrtm(r) for r in self.refs]


def fit_reference(covs_per_band: Sequence[Sequence[SpdMatrix]], tol: float = 1e-8,
                  max_iter: int = 50) -> ReferenceSet:
    """Geometric mean of the training covariances, independently per band."""
    refs = []
    flags = []
    for band_covs in covs_per_band:
        result = geometric_mean(list(band_covs), tol=tol, max_iter=max_iter)
        refs.append(result.matrix)
        flags.append(result.converged)
    return ReferenceSet(refs=tuple(refs), converged=tuple(flags))
