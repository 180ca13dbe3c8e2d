"""One-vs-rest linear SVM trained by dual coordinate descent, plus its
sign-binarized deployment form.

The primal objective per class is the bias-free L2-regularized hinge loss;
the dual is solved by coordinate descent with a fixed example order per
epoch, stopping at duality gap <= tol or the epoch cap.  Trained weight rows
are L2-normalized.  Binarization applies the componentwise Heaviside step
(H(0) = 1) to each weight row; binary decisions take the nearest prototype
by Hamming distance, ties to the lowest class index.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .projection import BinaryVector, hamming_matrix, heaviside_bits, pack_rows


@dataclass
class SvmModel:
    """Trained one-vs-rest weights, one unit-norm row per class."""

    weights: np.ndarray  # (n_cl, n_features) f64
    reg_c: float
    gaps: np.ndarray  # final duality gap per class
    epochs: np.ndarray  # epochs run per class

    @property
    def n_cl(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


@dataclass
class BinarizedSvm:
    """Per-class binary prototypes H(w_i), packed."""

    prototypes: tuple[BinaryVector, ...]

    @property
    def n_cl(self) -> int:
        return len(self.prototypes)

    @property
    def dim(self) -> int:
        return self.prototypes[0].dim


def train_linear_svm(
    x: np.ndarray,
    labels: np.ndarray,
    n_cl: int,
    reg_c: float = 1.0,
    gap_tol: float = 1e-4,
    max_epochs: int = 1000,
    threads: int = 1,
) -> SvmModel:
    """Train one-vs-rest on (n, n_features) float features.

    Every class in [0, n_cl) must appear in ``labels``.  The solver visits
    examples in index order each epoch, so training is deterministic and
    independent of the thread count (threads parallelize across the
    independent per-class subproblems).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise ValueError("need one label per feature row")
    if x.shape[0] < 1:
        raise ValueError("need at least one training example")
    if n_cl < 2:
        raise ValueError("need at least two classes")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if reg_c <= 0.0:
        raise ValueError("reg_c must be positive")
    present = set(int(v) for v in labels)
    missing = [c for c in range(n_cl) if c not in present]
    if missing:
        raise ValueError("class %d missing from training data" % missing[0])
    if labels.min() < 0 or labels.max() >= n_cl:
        raise ValueError("labels out of range")

    def solve(c: int):
        y = np.where(labels == c, 1.0, -1.0)
        return kernels.dcd_solve(x, y, reg_c, gap_tol, max_epochs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, range(n_cl)))
    else:
        results = [solve(c) for c in range(n_cl)]

    weights = np.empty((n_cl, x.shape[1]))
    gaps = np.empty(n_cl)
    epochs = np.empty(n_cl, dtype=np.int64)
    for c, (w, _, gap, ep) in enumerate(results):
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            raise ValueError("degenerate training for class %d (zero weights)" % c)
        weights[c] = w / norm
        gaps[c] = gap
        epochs[c] = ep
    return SvmModel(weights=weights, reg_c=reg_c, gaps=gaps, epochs=epochs)


def train_bipolar_svm(
    x: np.ndarray,
    labels: np.ndarray,
    n_cl: int,
    reg_c: float = 1.0,
    gap_tol: float = 1e-4,
    max_epochs: int = 1000,
    threads: int = 1,
) -> SvmModel:
    """Train on bipolar-mapped binary features; entries must be exactly +-1."""
    x = np.asarray(x, dtype=np.float64)
    if x.size and not np.all(np.abs(x) == 1.0):
        raise ValueError("features must be bipolar (-1 or +1)")
    return train_linear_svm(x, labels, n_cl, reg_c, gap_tol, max_epochs, threads)


def decide_float(model: SvmModel, feats: np.ndarray) -> tuple[int, np.ndarray]:
    """Argmax of per-class inner products; ties go to the lowest index."""
    feats = np.asarray(feats, dtype=np.float64)
    if feats.shape != (model.n_features,):
        raise ValueError("feature dimension mismatch (expected %d)" % model.n_features)
    scores = model.weights @ feats
    return int(np.argmax(scores)), scores


def binarize_svm(model: SvmModel) -> BinarizedSvm:
    """Collapse each weight row to its sign pattern, H(0) = 1."""
    return BinarizedSvm(
        prototypes=tuple(heaviside_bits(model.weights[c]) for c in range(model.n_cl))
    )


def decide_binary(bsvm: BinarizedSvm, encoded: BinaryVector) -> tuple[int, np.ndarray]:
    """Nearest prototype by raw Hamming distance; ties to the lowest index."""
    if encoded.dim != bsvm.dim:
        raise ValueError("dimension mismatch")
    dists = hamming_matrix(encoded.words[None, :], pack_rows(list(bsvm.prototypes)))[0]
    return int(np.argmin(dists)), dists
