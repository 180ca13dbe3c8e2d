"""Seed-rematerialized bipolar random projection into packed binary vectors.

Rows of the projection are never stored: entry (i, j) is drawn from a
counter-based hash of (seed, i*n_features + j), so any row can be
rematerialized on demand, in any order, on any thread, from the 4-byte seed
alone.  ``sparse_bipolar`` rows take the value 0 with probability
``sparsity`` and +1/-1 with equal probability otherwise; ``dense_bipolar``
rows are +1/-1 only.  Projected features are binarized by sign with
H(0) = 1, matching the componentwise Heaviside step used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

KIND_SPARSE = "sparse_bipolar"
KIND_DENSE = "dense_bipolar"
_KINDS = (KIND_SPARSE, KIND_DENSE)


@dataclass(frozen=True)
class ProjectionSpec:
    """Complete description of a projection; the seed is the only weight
    storage (4 bytes)."""

    kind: str
    dim: int
    n_features: int
    sparsity: float
    seed: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("kind must be one of %s" % (_KINDS,))
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.n_features < 1:
            raise ValueError("n_features must be at least 1")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValueError("sparsity must be in [0, 1)")
        if self.kind == KIND_DENSE and self.sparsity != 0.0:
            raise ValueError("dense_bipolar requires sparsity 0")
        if not 0 <= self.seed < 2**32:
            raise ValueError("seed must fit in 32 bits")


@dataclass(frozen=True)
class BinaryVector:
    """Bit-packed binary vector: bit i lives in words[i // 64] at lane i % 64.

    Padding bits beyond ``dim`` are always zero.
    """

    dim: int
    words: np.ndarray

    def __post_init__(self):
        expected = (self.dim + 63) // 64
        if self.words.dtype != np.uint64 or self.words.shape != (expected,):
            raise ValueError("words must be uint64 of length ceil(dim / 64)")
        pad = expected * 64 - self.dim
        if pad and int(self.words[-1] >> np.uint64(64 - pad)) != 0:
            raise ValueError("padding bits must be zero")

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BinaryVector":
        bits = np.asarray(bits)
        if bits.ndim != 1 or bits.shape[0] < 1:
            raise ValueError("bits must be a non-empty 1-d array")
        return cls(dim=bits.shape[0], words=kernels.pack_bits(bits != 0))

    def to_bits(self) -> np.ndarray:
        return kernels.unpack_bits(self.words, self.dim)

    def to_bipolar(self) -> np.ndarray:
        return self.to_bits().astype(np.float64) * 2.0 - 1.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.words, other.words)


def pack_rows(vectors: list[BinaryVector]) -> np.ndarray:
    """Stack equally sized binary vectors into a (count, n_words) matrix."""
    if not vectors:
        raise ValueError("need at least one vector")
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise ValueError("dimension mismatch")
    return np.stack([v.words for v in vectors])


def _stream_params(spec: ProjectionSpec):
    key = kernels.stream_key(spec.seed)
    t0, t1 = kernels.ternary_thresholds(spec.sparsity)
    return key, t0, t1


def materialize_row(spec: ProjectionSpec, row: int) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero entries of one projection row as (column indices, signs).

    Pure function of (spec, row): call order and thread placement cannot
    change the result.
    """
    if not 0 <= row < spec.dim:
        raise ValueError("row out of range")
    key, t0, t1 = _stream_params(spec)
    counters = np.uint64(row) * np.uint64(spec.n_features) + np.arange(
        spec.n_features, dtype=np.uint64
    )
    u = kernels.hash_u64(key, counters)
    nz = u >= t0
    idx = np.nonzero(nz)[0].astype(np.int64)
    signs = np.where(u[nz] >= t1, -1.0, 1.0)
    return idx, signs


def materialize_matrix(spec: ProjectionSpec) -> np.ndarray:
    """Dense (dim, n_features) projection matrix; intended for small specs."""
    if spec.dim * spec.n_features > 200_000_000:
        raise ValueError("projection too large to materialize densely")
    out = np.zeros((spec.dim, spec.n_features))
    for i in range(spec.dim):
        idx, signs = materialize_row(spec, i)
        out[i, idx] = signs
    return out


def project_binarize(spec: ProjectionSpec, feats: np.ndarray) -> BinaryVector:
    """Sign-binarized projection H(R f) with H(0) = 1."""
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    if feats.ndim != 1 or feats.shape[0] != spec.n_features:
        raise ValueError(
            "feature dimension mismatch (expected %d)" % spec.n_features
        )
    if not np.all(np.isfinite(feats)):
        raise ValueError("features must be finite")
    key, t0, t1 = _stream_params(spec)
    words = kernels.project_bits(feats, spec.dim, key, t0, t1)
    return BinaryVector(dim=spec.dim, words=words)


def heaviside_bits(values: np.ndarray) -> BinaryVector:
    """Componentwise Heaviside step H(v) with H(0) = 1, packed."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 1:
        raise ValueError("values must be a non-empty 1-d array")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    return BinaryVector.from_bits(values >= 0.0)


def hamming(a: BinaryVector, b: BinaryVector) -> tuple[int, float]:
    """Raw and normalized Hamming distance between two packed vectors."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    raw = int(kernels.hamming_many(a.words[None, :], b.words[None, :])[0, 0])
    return raw, raw / a.dim


def hamming_matrix(queries: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Raw Hamming distances between packed rows: (m, W) x (k, W) -> (m, k)."""
    queries = np.ascontiguousarray(queries, dtype=np.uint64)
    prototypes = np.ascontiguousarray(prototypes, dtype=np.uint64)
    if queries.ndim != 2 or prototypes.ndim != 2 or queries.shape[1] != prototypes.shape[1]:
        raise ValueError("packed rows must share the word count")
    return kernels.hamming_many(queries, prototypes)


def cosine_from_hamming(normalized: float | np.ndarray):
    """Cosine similarity of bipolar vectors from their normalized Hamming
    distance: cos = 1 - 2 h."""
    return 1.0 - 2.0 * np.asarray(normalized, dtype=np.float64)
