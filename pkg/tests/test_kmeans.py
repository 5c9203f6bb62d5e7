import numpy as np
import pytest

from ckmeans.errors import ValidationError
from ckmeans.kmeans import align_to_sizes, lloyd, to_assignment
from ckmeans.operators import Shape, psi_t_apply


def test_two_pairs(four_points):
    res = lloyd(four_points, 2, seed=0)
    assert res.objective == pytest.approx(0.01)
    assert res.labels[0] == res.labels[1] != res.labels[2] == res.labels[3]


def test_k_equals_n(four_points):
    res = lloyd(four_points, 4, seed=3)
    assert sorted(res.labels) == [0, 1, 2, 3]
    assert res.objective == 0.0


def test_k_one(rng):
    S = rng.normal(size=(2, 7))
    res = lloyd(S, 1)
    assert np.all(res.labels == 0)
    assert np.allclose(res.centroids[0], S.mean(axis=1))


def test_monotone_and_deterministic(rng):
    S = rng.normal(size=(2, 40))
    a = lloyd(S, 4, seed=11)
    b = lloyd(S, 4, seed=11)
    assert np.array_equal(a.labels, b.labels)
    assert all(h1 >= h2 - 1e-12 for h1, h2 in zip(a.history, a.history[1:]))
    assert a.objective <= a.history[0] + 1e-12


def test_no_empty_clusters_with_duplicates():
    S = np.array([[0.0, 0.0, 0.0, 0.0, 1.0]])
    res = lloyd(S, 3, seed=0)
    assert np.bincount(res.labels, minlength=3).min() >= 1


def test_errors(four_points):
    with pytest.raises(ValidationError):
        lloyd(four_points, 5)
    with pytest.raises(ValidationError):
        lloyd(four_points, 2, max_iters=0)


def test_to_assignment():
    assert np.array_equal(to_assignment([0, 1], Shape(2, 2)), [1, 0, 0, 1])
    assert np.array_equal(to_assignment([1, 1], Shape(2, 2)), [0, 1, 0, 1])
    labels = np.array([2, 0, 1, 1, 2])
    x = to_assignment(labels, Shape(5, 3))
    assert np.array_equal(x.reshape(5, 3).argmax(axis=1), labels)
    assert np.array_equal(psi_t_apply(x, Shape(5, 3)), np.ones(5))
    with pytest.raises(ValidationError):
        to_assignment([0, 3], Shape(2, 2))


def test_align_to_sizes():
    labels = np.array([0, 0, 0, 1, 2, 2])
    out = align_to_sizes(labels, (2, 3, 1))
    assert np.array_equal(np.bincount(out, minlength=3), [2, 3, 1])
    # partition is unchanged, only names move
    assert out[0] == out[1] == out[2] and out[4] == out[5]
