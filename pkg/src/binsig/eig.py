"""Deterministic symmetric eigensolver built from scratch.

Householder tridiagonalization followed by implicit Wilkinson-shift QR/QL
sweeps on the tridiagonal form.  The decomposition is fully deterministic:
eigenvalues are returned ascending (stable sort, ties keep the pre-sort
order), and each eigenvector is signed so that its largest-magnitude
component is positive (first such component on magnitude ties).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import maybe_jit

_EPS = float(np.finfo(np.float64).eps)

# Iteration budget per eigenvalue, scaled by matrix order in the driver.
ITER_CAP_PER_EIG = 30


class EigenConvergenceError(RuntimeError):
    """Raised when an eigenvalue fails to converge within the iteration cap."""


@dataclass(frozen=True)
class EigenDecomposition:
    """values[i] ascending, vectors[:, i] the matching unit eigenvector."""

    values: np.ndarray
    vectors: np.ndarray


def _tridiagonalize(t, q):
    # Similarity-reduce t to tridiagonal form in place, accumulating the
    # orthogonal transform into q (preinitialized to identity).
    n = t.shape[0]
    v = np.zeros(n)
    w = np.zeros(n)
    for k in range(n - 2):
        norm2 = 0.0
        for i in range(k + 1, n):
            norm2 += t[i, k] * t[i, k]
        if norm2 == 0.0:
            continue
        normx = np.sqrt(norm2)
        x0 = t[k + 1, k]
        alpha = -normx if x0 >= 0.0 else normx
        vnorm2 = norm2 - 2.0 * alpha * x0 + alpha * alpha
        if vnorm2 == 0.0:
            continue
        v[k + 1] = x0 - alpha
        for i in range(k + 2, n):
            v[i] = t[i, k]
        beta = 2.0 / vnorm2
        # w = beta * T v - (beta^2 / 2) (v^T T v) v, so T <- T - v w^T - w v^T
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += t[i, j] * v[j]
            w[i] = beta * s
        tv = 0.0
        for i in range(k + 1, n):
            tv += w[i] * v[i]
        corr = 0.5 * beta * tv
        for i in range(k + 1, n):
            w[i] -= corr * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            wi = w[i]
            for j in range(k + 1, n):
                t[i, j] -= vi * w[j] + wi * v[j]
        t[k + 1, k] = alpha
        t[k, k + 1] = alpha
        for i in range(k + 2, n):
            t[i, k] = 0.0
            t[k, i] = 0.0
        # q <- q (I - beta v v^T)
        for r in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += q[r, j] * v[j]
            s *= beta
            for j in range(k + 1, n):
                q[r, j] -= s * v[j]


def _implicit_shift(d, e, q, iter_cap):
    # Implicit Wilkinson-shift sweeps on the tridiagonal (d, e); plane
    # rotations are accumulated into the columns of q.  e[i] couples d[i] and
    # d[i+1]; e[n-1] is scratch.  Returns 0 on success, 1 on an eigenvalue
    # exceeding the iteration cap.
    n = d.shape[0]
    for low in range(n):
        iters = 0
        while True:
            m = low
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == low:
                break
            iters += 1
            if iters > iter_cap:
                return 1
            g = (d[low + 1] - d[low]) / (2.0 * e[low])
            r = np.hypot(g, 1.0)
            sr = r if g >= 0.0 else -r
            g = d[m] - d[low] + e[low] / (g + sr)
            s = 1.0
            c = 1.0
            p = 0.0
            clean = True
            for i in range(m - 1, low - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    clean = False
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f2 = q[k, i + 1]
                    q[k, i + 1] = s * q[k, i] + c * f2
                    q[k, i] = c * q[k, i] - s * f2
            if clean:
                d[low] -= p
                e[low] = g
                e[m] = 0.0
    return 0


_tridiagonalize_impl = maybe_jit(_tridiagonalize)
_implicit_shift_impl = maybe_jit(_implicit_shift)


def eigh_symmetric(a: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a real symmetric matrix.

    Raises ValueError for non-square or non-symmetric input and
    EigenConvergenceError if any eigenvalue needs more than 30*n sweeps.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        raise ValueError("matrix must be non-empty")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if float(np.max(np.abs(a - a.T))) > 1e-10 * (1.0 + scale):
        raise ValueError("matrix must be symmetric")

    t = np.array(a, dtype=np.float64, order="C", copy=True)
    q = np.eye(n)
    if n > 2:
        _tridiagonalize_impl(t, q)
    d = np.diagonal(t).copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = t[i + 1, i]
    status = _implicit_shift_impl(d, e, q, ITER_CAP_PER_EIG * n)
    if status != 0:
        raise EigenConvergenceError(
            "no convergence within %d sweeps per eigenvalue" % (ITER_CAP_PER_EIG * n)
        )
    order = np.argsort(d, kind="stable")
    values = d[order]
    vectors = q[:, order]
    anchor = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[anchor, np.arange(n)] < 0.0
    vectors[:, flip] *= -1.0
    return EigenDecomposition(values=values, vectors=vectors)
