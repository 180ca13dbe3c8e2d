"""Binary key-value memory: attention, readout, few-shot behavior."""

import numpy as np
import pytest

from binsig.memory import (
    DEFAULT_BETA,
    KeyValueMemory,
    attend,
    classify,
    readout,
    softabs,
    write_support,
)
from binsig.projection import BinaryVector


def random_keys(rng, count, dim):
    return [BinaryVector.from_bits(rng.integers(0, 2, dim).astype(bool)) for _ in range(count)]


def test_readout_worked_example():
    # Four stored examples with labels (0, 1, 1, 0): attention
    # (0.2, 0.3, 0.4, 0.1) must sum per class to (0.3, 0.7) and pick class 1.
    rng = np.random.default_rng(0)
    mem = write_support(random_keys(rng, 4, 16), np.array([0, 1, 1, 0]), n_cl=2)
    scores = readout(mem, np.array([0.2, 0.3, 0.4, 0.1]))
    np.testing.assert_allclose(scores, [0.3, 0.7], rtol=0.0, atol=1e-15)
    assert int(np.argmax(scores)) == 1


def test_softabs_symmetric_and_monotone_in_magnitude():
    a = np.linspace(0.0, 1.0, 21)
    np.testing.assert_allclose(softabs(a), softabs(-a), rtol=1e-14)
    eps = softabs(a)
    assert np.all(np.diff(eps) > 0.0)
    assert softabs(np.array([1.0]))[0] > softabs(np.array([0.0]))[0]


def test_softabs_squashes_near_zero():
    beta = 10.0
    low = softabs(np.array([0.0]), beta)[0]
    high = softabs(np.array([1.0]), beta)[0]
    assert low < 0.02
    assert high > 0.95


def test_attention_normalized():
    rng = np.random.default_rng(1)
    mem = write_support(random_keys(rng, 8, 64), np.arange(8) % 3, n_cl=3)
    query = random_keys(rng, 1, 64)[0]
    a = attend(mem, query)
    assert a.shape == (8,)
    assert np.all(a >= 0.0)
    np.testing.assert_allclose(a.sum(), 1.0, rtol=1e-12)


def test_classify_returns_scores_summing_to_one():
    rng = np.random.default_rng(2)
    mem = write_support(random_keys(rng, 6, 64), np.array([0, 0, 1, 1, 2, 2]), n_cl=3)
    pred, scores = classify(mem, random_keys(rng, 1, 64)[0])
    assert scores.shape == (3,)
    np.testing.assert_allclose(scores.sum(), 1.0, rtol=1e-12)
    assert pred == int(np.argmax(scores))


def test_sharp_beta_behaves_like_nearest_key():
    # With a large beta, a query that is a lightly corrupted copy of one
    # stored key must take that key's label.
    rng = np.random.default_rng(3)
    dim = 256
    keys = random_keys(rng, 8, dim)
    labels = np.arange(8) % 4
    mem = write_support(keys, labels, n_cl=4, beta=100.0)
    for trial in range(50):
        pick = int(rng.integers(0, 8))
        bits = keys[pick].to_bits().copy()
        flips = rng.choice(dim, size=20, replace=False)
        bits[flips] = ~bits[flips]
        pred, _ = classify(mem, BinaryVector.from_bits(bits))
        assert pred == labels[pick]


def test_permutation_equivariance():
    rng = np.random.default_rng(4)
    keys = random_keys(rng, 10, 128)
    labels = rng.integers(0, 3, size=10)
    query = random_keys(rng, 1, 128)[0]
    mem = write_support(keys, labels, n_cl=3)
    perm = rng.permutation(10)
    mem_p = write_support([keys[i] for i in perm], labels[perm], n_cl=3)
    np.testing.assert_allclose(
        readout(mem, attend(mem, query)),
        readout(mem_p, attend(mem_p, query)),
        rtol=1e-12,
    )


def test_append_support_and_extend_classes():
    rng = np.random.default_rng(5)
    mem = write_support(random_keys(rng, 2, 64), np.array([0, 1]), n_cl=2)
    assert mem.n_keys == 2
    mem.extend_classes(3)
    mem.append_support(random_keys(rng, 1, 64)[0], 2)
    assert mem.n_keys == 3
    assert mem.n_cl == 3
    with pytest.raises(ValueError, match="shrink"):
        mem.extend_classes(2)


def test_write_support_validation():
    rng = np.random.default_rng(6)
    with pytest.raises(ValueError, match="at least one"):
        write_support([], np.array([]), n_cl=2)
    keys = random_keys(rng, 3, 32)
    with pytest.raises(ValueError, match="one label per key"):
        write_support(keys, np.array([0, 1]), n_cl=2)
    with pytest.raises(ValueError, match="labels out of range"):
        write_support(keys, np.array([0, 1, 5]), n_cl=2)


def test_memory_validation():
    with pytest.raises(ValueError, match="two classes"):
        KeyValueMemory(dim=16, n_cl=1)
    with pytest.raises(ValueError, match="beta"):
        KeyValueMemory(dim=16, n_cl=2, beta=0.0)
    mem = KeyValueMemory(dim=16, n_cl=2)
    with pytest.raises(ValueError, match="empty"):
        attend(mem, BinaryVector.from_bits(np.ones(16, dtype=bool)))


def test_attention_underflow_reported():
    # At extreme sharpness every mid-range similarity rounds to zero weight.
    rng = np.random.default_rng(7)
    keys = random_keys(rng, 4, 64)
    mem = write_support(keys, np.array([0, 1, 0, 1]), n_cl=2, beta=1e5)
    query = random_keys(rng, 1, 64)[0]
    with pytest.raises(ValueError, match="attention underflow"):
        attend(mem, query)


def test_default_beta_value():
    assert DEFAULT_BETA == 10.0
