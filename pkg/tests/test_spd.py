"""SPD containers, matrix functions, geometric mean, tangent features."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binsig.spd import (
    GeometricMeanResult,
    SpdMatrix,
    covariance,
    expm,
    fit_reference,
    geometric_mean,
    half_vectorize,
    inv_sqrtm,
    logm,
    n_feature_pairs,
    riemannian_features,
    sqrtm,
)


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    vals = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return (q * vals) @ q.T


def test_covariance_formula():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 30))
    c = covariance(x, alpha=0.1)
    want = (x @ x.T + 0.1 * np.eye(4)) / 29.0
    np.testing.assert_allclose(c.full(), want, rtol=1e-12, atol=1e-12)


def test_covariance_rejects_bad_input():
    with pytest.raises(ValueError, match="2-d"):
        covariance(np.zeros(5))
    with pytest.raises(ValueError, match="at least 2 samples"):
        covariance(np.zeros((3, 1)))
    with pytest.raises(ValueError, match="alpha"):
        covariance(np.zeros((3, 5)), alpha=-1.0)


def test_spd_matrix_roundtrip():
    rng = np.random.default_rng(1)
    a = random_spd(rng, 5)
    m = SpdMatrix.from_full(a)
    np.testing.assert_allclose(m.full(), a, rtol=1e-15, atol=1e-15)
    assert m.packed.shape == (15,)


def test_from_full_rejects_non_spd():
    with pytest.raises(ValueError):
        SpdMatrix.from_full(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        SpdMatrix.from_full(np.diag([1.0, -1.0]))


def test_logm_matches_numpy_oracle():
    rng = np.random.default_rng(2)
    for n in (2, 5, 10):
        a = random_spd(rng, n)
        vals, vecs = np.linalg.eigh(a)
        want = (vecs * np.log(vals)) @ vecs.T
        np.testing.assert_allclose(logm(a), want, rtol=1e-9, atol=1e-10)


def test_expm_logm_roundtrip():
    rng = np.random.default_rng(3)
    a = random_spd(rng, 6)
    np.testing.assert_allclose(expm(logm(a)), a, rtol=1e-9, atol=1e-10)


def test_sqrtm_and_inv_sqrtm_defining_properties():
    rng = np.random.default_rng(4)
    a = random_spd(rng, 7)
    s = sqrtm(a)
    np.testing.assert_allclose(s @ s, a, rtol=1e-9, atol=1e-10)
    w = inv_sqrtm(a)
    np.testing.assert_allclose(w @ a @ w, np.eye(7), rtol=1e-9, atol=1e-9)


def test_inv_sqrtm_rejects_indefinite():
    with pytest.raises(ValueError, match="positive definite"):
        inv_sqrtm(np.diag([1.0, -2.0]))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**16))
def test_half_vectorize_preserves_norm(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    s = (a + a.T) / 2.0
    v = half_vectorize(s)
    assert v.shape == (n_feature_pairs(n),)
    np.testing.assert_allclose(np.linalg.norm(v), np.linalg.norm(s), rtol=1e-12)


def test_half_vectorize_layout():
    s = np.array([[1.0, 4.0, 5.0], [4.0, 2.0, 6.0], [5.0, 6.0, 3.0]])
    r2 = np.sqrt(2.0)
    want = [1.0, 4.0 * r2, 2.0, 5.0 * r2, 6.0 * r2, 3.0]
    np.testing.assert_allclose(half_vectorize(s), want, rtol=1e-15)


def test_geometric_mean_two_matrix_closed_form():
    # A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2
    rng = np.random.default_rng(5)
    a = random_spd(rng, 6)
    b = random_spd(rng, 6)
    ah = sqrtm(a)
    aih = inv_sqrtm(a)
    want = ah @ sqrtm(aih @ b @ aih) @ ah
    got = geometric_mean([SpdMatrix.from_full(a), SpdMatrix.from_full(b)])
    assert got.converged
    np.testing.assert_allclose(got.matrix.full(), want, rtol=1e-8, atol=1e-8)


def test_geometric_mean_permutation_invariant():
    rng = np.random.default_rng(6)
    mats = [SpdMatrix.from_full(random_spd(rng, 5)) for _ in range(4)]
    fwd = geometric_mean(mats).matrix.full()
    rev = geometric_mean(mats[::-1]).matrix.full()
    np.testing.assert_allclose(fwd, rev, rtol=1e-8, atol=1e-8)


def test_geometric_mean_single_matrix_is_itself():
    rng = np.random.default_rng(7)
    a = random_spd(rng, 4)
    got = geometric_mean([SpdMatrix.from_full(a)])
    np.testing.assert_allclose(got.matrix.full(), a, rtol=1e-10, atol=1e-10)


def test_geometric_mean_of_scalars():
    mats = [SpdMatrix.from_full(np.array([[x]])) for x in (1.0, 4.0, 16.0)]
    got = geometric_mean(mats).matrix.full()[0, 0]
    np.testing.assert_allclose(got, 4.0, rtol=1e-10)


def test_geometric_mean_result_reports_iterations():
    rng = np.random.default_rng(8)
    mats = [SpdMatrix.from_full(random_spd(rng, 4)) for _ in range(3)]
    res = geometric_mean(mats, tol=1e-10, max_iter=50)
    assert isinstance(res, GeometricMeanResult)
    assert res.converged and res.residual <= 1e-10
    assert 0 < res.iterations <= 50


def test_riemannian_features_zero_at_own_reference():
    rng = np.random.default_rng(9)
    a = random_spd(rng, 5)
    feats = riemannian_features([SpdMatrix.from_full(a)], [inv_sqrtm(a)])
    np.testing.assert_allclose(feats, np.zeros(15), atol=1e-9)


def test_riemannian_features_concatenates_bands():
    rng = np.random.default_rng(10)
    covs = [SpdMatrix.from_full(random_spd(rng, 4)) for _ in range(3)]
    refs = [inv_sqrtm(c.full()) for c in covs]
    feats = riemannian_features(covs, refs)
    assert feats.shape == (3 * n_feature_pairs(4),)


def test_fit_reference_per_band():
    rng = np.random.default_rng(11)
    band0 = [SpdMatrix.from_full(random_spd(rng, 4)) for _ in range(5)]
    band1 = [SpdMatrix.from_full(random_spd(rng, 4)) for _ in range(5)]
    refs = fit_reference([band0, band1])
    assert len(refs.refs) == 2
    assert all(refs.converged)
    # Whitening every training covariance by the mean must center the
    # tangent vectors at zero.
    w = refs.inv_sqrts()[0]
    tangents = [logm(w @ c.full() @ w) for c in band0]
    np.testing.assert_allclose(sum(tangents), np.zeros((4, 4)), atol=1e-6)
