"""Bit-packed vectors, counter-based projection, Hamming geometry."""

import numpy as np
import pytest

from binsig.projection import (
    KIND_DENSE,
    KIND_SPARSE,
    BinaryVector,
    ProjectionSpec,
    cosine_from_hamming,
    hamming,
    hamming_matrix,
    heaviside_bits,
    materialize_matrix,
    materialize_row,
    pack_rows,
    project_binarize,
)


def sparse_spec(**kw):
    base = dict(kind=KIND_SPARSE, dim=256, n_features=40, sparsity=0.9, seed=1)
    base.update(kw)
    return ProjectionSpec(**base)


def test_binary_vector_roundtrip():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=130).astype(bool)
    v = BinaryVector.from_bits(bits)
    np.testing.assert_array_equal(v.to_bits(), bits)
    np.testing.assert_array_equal(v.to_bipolar(), np.where(bits, 1.0, -1.0))


def test_binary_vector_rejects_dirty_padding():
    words = np.array([np.uint64(0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    with pytest.raises(ValueError, match="padding"):
        BinaryVector(dim=60, words=words)


def test_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        sparse_spec(kind="fourier")
    with pytest.raises(ValueError, match="sparsity"):
        sparse_spec(sparsity=1.0)
    with pytest.raises(ValueError, match="dense_bipolar requires"):
        ProjectionSpec(kind=KIND_DENSE, dim=8, n_features=4, sparsity=0.5, seed=0)
    with pytest.raises(ValueError, match="seed"):
        sparse_spec(seed=2**32)


def test_hamming_cosine_identity_exact():
    rng = np.random.default_rng(1)
    for _ in range(50):
        bits_a = rng.integers(0, 2, size=512).astype(bool)
        bits_b = rng.integers(0, 2, size=512).astype(bool)
        a, b = BinaryVector.from_bits(bits_a), BinaryVector.from_bits(bits_b)
        raw, norm = hamming(a, b)
        # Integer identity: d - 2*raw equals the bipolar dot product.
        dot = int((bits_a == bits_b).sum()) - int((bits_a != bits_b).sum())
        assert 512 - 2 * raw == dot
        assert cosine_from_hamming(norm) == pytest.approx(dot / 512.0, abs=1e-15)


def test_hamming_requires_matching_dims():
    a = BinaryVector.from_bits(np.ones(10, dtype=bool))
    b = BinaryVector.from_bits(np.ones(11, dtype=bool))
    with pytest.raises(ValueError, match="dimension mismatch"):
        hamming(a, b)


def test_hamming_matrix_matches_pairwise():
    rng = np.random.default_rng(2)
    qs = [BinaryVector.from_bits(rng.integers(0, 2, 200).astype(bool)) for _ in range(6)]
    ps = [BinaryVector.from_bits(rng.integers(0, 2, 200).astype(bool)) for _ in range(3)]
    mat = hamming_matrix(pack_rows(qs), pack_rows(ps))
    for i, q in enumerate(qs):
        for j, p in enumerate(ps):
            assert mat[i, j] == hamming(q, p)[0]


def test_project_binarize_matches_dense_materialization():
    rng = np.random.default_rng(3)
    feats = rng.standard_normal(40)
    for spec in (sparse_spec(), sparse_spec(kind=KIND_DENSE, sparsity=0.0)):
        r = materialize_matrix(spec)
        want = (r @ feats) >= 0.0
        got = project_binarize(spec, feats)
        np.testing.assert_array_equal(got.to_bits(), want)


def test_materialize_row_deterministic_and_order_free():
    spec = sparse_spec()
    idx_a, signs_a = materialize_row(spec, 17)
    # Touch other rows in between; row 17 must not care.
    materialize_row(spec, 3)
    materialize_row(spec, 200)
    idx_b, signs_b = materialize_row(spec, 17)
    np.testing.assert_array_equal(idx_a, idx_b)
    np.testing.assert_array_equal(signs_a, signs_b)


def test_sparsity_empirical():
    spec = sparse_spec(dim=5000, n_features=100)
    r = materialize_matrix(spec)
    frac_nonzero = (r != 0).mean()
    assert abs(frac_nonzero - 0.1) < 0.01
    signs = r[r != 0]
    assert abs((signs > 0).mean() - 0.5) < 0.02


def test_different_seeds_give_different_rows():
    a = materialize_matrix(sparse_spec(seed=1))
    b = materialize_matrix(sparse_spec(seed=2))
    assert not np.array_equal(a, b)


def test_heaviside_zero_maps_to_one():
    v = heaviside_bits(np.array([0.0, -0.5, 0.5, -0.0]))
    np.testing.assert_array_equal(v.to_bits(), [True, False, True, True])


def test_project_rejects_wrong_dim_and_nonfinite():
    spec = sparse_spec()
    with pytest.raises(ValueError, match="feature dimension mismatch"):
        project_binarize(spec, np.zeros(7))
    with pytest.raises(ValueError, match="finite"):
        project_binarize(spec, np.full(40, np.inf))


def test_angle_preservation_dense_small_scale():
    # Normalized Hamming distance estimates theta / pi; moderate dimension
    # keeps this quick while the acceptance run uses the full setting.
    rng = np.random.default_rng(4)
    d, n_f = 4096, 32
    spec = ProjectionSpec(kind=KIND_DENSE, dim=d, n_features=n_f, sparsity=0.0, seed=9)
    errs = []
    for _ in range(30):
        u = rng.standard_normal(n_f)
        v = rng.standard_normal(n_f)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        theta = np.arccos(np.clip(u @ v, -1.0, 1.0))
        _, h_uv = hamming(project_binarize(spec, u), project_binarize(spec, v))
        errs.append(abs(h_uv - theta / np.pi))
    assert np.mean(errs) < 0.03


def test_pack_rows_rejects_mixed_dims():
    a = BinaryVector.from_bits(np.ones(10, dtype=bool))
    b = BinaryVector.from_bits(np.ones(12, dtype=bool))
    with pytest.raises(ValueError, match="dimension mismatch"):
        pack_rows([a, b])
