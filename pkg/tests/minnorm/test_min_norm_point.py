# tests/minnorm/test_min_norm_point.py
import numpy as np
import pytest
from scipy import optimize

from gradsample.errors import InvalidInputError
from gradsample.minnorm import GradientSet, average_fallback, min_norm_or_average, min_norm_point


def _check_simplex(result, vectors, tol=1e-10):
    assert np.all(result.weights >= 0.0)
    assert result.weights.sum() == pytest.approx(1.0, abs=tol)
    np.testing.assert_allclose(result.point, result.weights @ np.asarray(vectors, dtype=float), atol=tol)


def test_single_point_hull():
    result = min_norm_point([[3.0, 4.0]])
    np.testing.assert_allclose(result.point, [3.0, 4.0])
    assert result.norm == pytest.approx(5.0)
    np.testing.assert_allclose(result.weights, [1.0])
    assert result.method == "qp"


def test_origin_inside_hull():
    result = min_norm_point([[-1.0], [2.0]])
    assert result.norm == pytest.approx(0.0, abs=1e-12)
    _check_simplex(result, [[-1.0], [2.0]])


def test_symmetric_segment():
    result = min_norm_point([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(result.point, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(result.weights, [0.5, 0.5], atol=1e-12)
    assert result.norm == pytest.approx(np.sqrt(2.0) / 2.0)


def test_vertex_is_minimizer():
    vectors = [[2.0, 0.0], [4.0, 0.0], [3.0, 1.0]]
    result = min_norm_point(vectors)
    np.testing.assert_allclose(result.point, [2.0, 0.0], atol=1e-12)
    assert result.norm == pytest.approx(2.0)
    _check_simplex(result, vectors)


def test_zero_vector_in_set_gives_zero_norm(rng):
    vectors = np.vstack([rng.normal(size=(4, 3)), np.zeros((1, 3))])
    assert min_norm_point(vectors).norm == 0.0


def test_never_worse_than_average_or_any_input(rng):
    for _ in range(50):
        vectors = rng.normal(size=(int(rng.integers(1, 6)), int(rng.integers(1, 4))))
        result = min_norm_point(vectors)
        assert result.norm <= average_fallback(vectors).norm + 1e-12
        assert result.norm <= np.linalg.norm(vectors, axis=1).min() + 1e-12
        _check_simplex(result, vectors)


def test_permutation_invariance(rng):
    vectors = rng.normal(size=(5, 3))
    reference = min_norm_point(vectors).point
    for _ in range(10):
        np.testing.assert_allclose(min_norm_point(rng.permutation(vectors)).point, reference, atol=1e-8)


def test_matches_sampled_and_solver_oracles(rng):
    for _ in range(200):
        k, n = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        vectors = rng.normal(size=(k, n))
        result = min_norm_point(vectors)

        weights = rng.dirichlet(np.ones(k), size=2000)
        sampled = np.linalg.norm(weights @ vectors, axis=1).min()
        assert result.norm <= sampled + 1e-6

        solver = optimize.minimize(
            lambda r: float((r @ vectors) @ (r @ vectors)),
            np.full(k, 1.0 / k),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * k,
            constraints=[{"type": "eq", "fun": lambda r: r.sum() - 1.0}],
            options={"ftol": 1e-14, "maxiter": 500},
        )
        assert result.norm**2 <= solver.fun + 1e-8


def test_average_fallback_examples():
    np.testing.assert_allclose(average_fallback([[1.0, 0.0], [0.0, 1.0]]).point, [0.5, 0.5])
    np.testing.assert_allclose(average_fallback([[2.0], [4.0], [6.0]]).point, [4.0])
    np.testing.assert_allclose(average_fallback([[-1.0], [1.0]]).point, [0.0])
    result = average_fallback([[2.0], [4.0], [6.0]])
    assert result.method == "average"
    np.testing.assert_allclose(result.weights, np.full(3, 1.0 / 3.0))


def test_min_norm_or_average_prefers_qp():
    result = min_norm_or_average(GradientSet.from_vectors([[1.0, 0.0], [0.0, 1.0]]))
    assert result.method == "qp"


def test_invalid_sets_are_rejected():
    with pytest.raises(InvalidInputError):
        min_norm_point([])
    with pytest.raises(InvalidInputError):
        average_fallback([])
    with pytest.raises(InvalidInputError):
        min_norm_point([[1.0, np.nan]])
    with pytest.raises(InvalidInputError):
        GradientSet.from_vectors([[1.0, 2.0], [1.0]])
    with pytest.raises(InvalidInputError):
        min_norm_point([[1.0]], tol=0.0)
