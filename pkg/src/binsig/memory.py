"""Binary key-value associative memory with soft-absolute attention.

Support examples are stored as packed binary keys with integer class
labels.  A query attends over all keys: each cosine similarity, recovered
exactly from the Hamming distance, is sharpened by a soft absolute-value
kernel built from two sigmoids, normalized to attention weights, and summed
per class to give the readout scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .projection import BinaryVector, hamming_matrix, pack_rows

DEFAULT_BETA = 10.0


def softabs(alpha: np.ndarray, beta: float = DEFAULT_BETA) -> np.ndarray:
    """Sharpened absolute value: sigmoid(beta*(a-0.5)) + sigmoid(-beta*(a+0.5)).

    Near-zero similarities are squashed toward 0 while |a| near 1 passes
    through, so anticorrelated keys still contribute.
    """
    a = np.asarray(alpha, dtype=np.float64)
    out = _sigmoid(beta * (a - 0.5))
    out += _sigmoid(-beta * (a + 0.5))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Route through exp of a non-positive argument so large |z| cannot
    # overflow.
    z = np.asarray(z, dtype=np.float64)
    pos = z >= 0.0
    ez = np.exp(np.where(pos, -z, z))
    return np.where(pos, 1.0 / (1.0 + ez), ez / (1.0 + ez))


@dataclass
class KeyValueMemory:
    """Packed binary keys with class labels and a fixed sharpness beta."""

    dim: int
    n_cl: int
    beta: float = DEFAULT_BETA
    keys: np.ndarray = field(default_factory=lambda: np.empty((0, 0), dtype=np.uint64))
    labels: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.n_cl < 2:
            raise ValueError("need at least two classes")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        words = (self.dim + 63) // 64
        if self.keys.size == 0:
            self.keys = np.empty((0, words), dtype=np.uint64)
        self.keys = np.ascontiguousarray(self.keys, dtype=np.uint64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.keys.ndim != 2 or self.keys.shape[1] != words:
            raise ValueError("key width does not match dim")
        if self.labels.shape != (self.keys.shape[0],):
            raise ValueError("need one label per key")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_cl):
            raise ValueError("labels out of range")

    @property
    def n_keys(self) -> int:
        return self.keys.shape[0]

    def extend_classes(self, n_cl: int) -> None:
        """Grow the class count so shots of a new class can be appended
        without touching existing keys."""
        if n_cl < self.n_cl:
            raise ValueError("cannot shrink the class count")
        self.n_cl = n_cl

    def append_support(self, key: BinaryVector, label: int) -> None:
        if key.dim != self.dim:
            raise ValueError("dimension mismatch")
        if not 0 <= label < self.n_cl:
            raise ValueError("labels out of range")
        self.keys = np.vstack([self.keys, key.words[None, :]])
        self.labels = np.append(self.labels, np.int64(label))


def write_support(
    keys: list[BinaryVector],
    labels: np.ndarray,
    n_cl: int,
    beta: float = DEFAULT_BETA,
) -> KeyValueMemory:
    """Build a memory from one batch of support vectors.

    Calling this again replaces the whole memory; incremental updates go
    through append_support.
    """
    if len(keys) == 0:
        raise ValueError("need at least one support example")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (len(keys),):
        raise ValueError("need one label per key")
    dim = keys[0].dim
    for k in keys:
        if k.dim != dim:
            raise ValueError("dimension mismatch")
    return KeyValueMemory(
        dim=dim, n_cl=n_cl, beta=beta, keys=pack_rows(keys), labels=labels
    )


def attend(mem: KeyValueMemory, query: BinaryVector) -> np.ndarray:
    """Normalized attention over stored keys for one query."""
    if query.dim != mem.dim:
        raise ValueError("dimension mismatch")
    if mem.n_keys == 0:
        raise ValueError("memory is empty")
    raw = hamming_matrix(query.words[None, :], mem.keys)[0]
    alpha = 1.0 - 2.0 * raw.astype(np.float64) / mem.dim
    eps = softabs(alpha, mem.beta)
    total = float(eps.sum())
    if total == 0.0:
        raise ValueError("attention underflow (all similarities squashed)")
    return eps / total


def readout(mem: KeyValueMemory, attention: np.ndarray) -> np.ndarray:
    """Per-class sums of attention weights (attention times one-hot labels)."""
    attention = np.asarray(attention, dtype=np.float64)
    if attention.shape != (mem.n_keys,):
        raise ValueError("need one attention weight per key")
    return np.bincount(mem.labels, weights=attention, minlength=mem.n_cl)


def classify(mem: KeyValueMemory, query: BinaryVector) -> tuple[int, np.ndarray]:
    """Argmax readout score; ties go to the lowest class index."""
    scores = readout(mem, attend(mem, query))
    return int(np.argmax(scores)), scores
