# tests/gs_engine/test_gs_engine.py
import math

import numpy as np
import pytest

from gradsample.configs import GsParams
from gradsample.errors import (
    InfeasiblePointError,
    InvalidInputError,
    NonConvergenceWarning,
    SamplingExhaustedError,
)
from gradsample.gs_engine import (
    FunctionObjective,
    approx_subgradient,
    armijo_search,
    gsda_minimize,
    resolve_sample_size,
    sample_unit_ball,
)
from gradsample.objectives import get_objective


def _abs_objective():
    return FunctionObjective(lambda x: float(abs(x[0])), np.sign, 1, name="abs")


def _square_objective():
    return FunctionObjective(lambda x: float(x[0] ** 2), lambda x: 2.0 * x, 1, name="square")


def _assert_descent_invariants(trace, params):
    accepted = trace.accepted_objectives()
    assert np.all(np.diff(accepted) < 0.0)
    eps = np.array([rec.eps for rec in trace.records])
    tau = np.array([rec.tau for rec in trace.records])
    assert np.all(np.diff(eps) <= 0.0)
    assert np.all(np.diff(tau) <= 0.0)
    for prev, rec in zip(trace.records, trace.records[1:]):
        if rec.eps < prev.eps:
            assert rec.eps == pytest.approx(prev.eps * params.mu, rel=1e-12)
            assert rec.tau == pytest.approx(prev.tau * params.lam, rel=1e-12)
    for prev, rec in zip(trace.records, trace.records[1:]):
        if rec.accepted:
            assert rec.objective < prev.objective - params.beta * rec.step * rec.slope


def test_unit_ball_samples_lie_in_ball():
    u = sample_unit_ball(2, 3, 7)
    assert u.shape == (3, 2)
    assert np.all(np.linalg.norm(u, axis=1) <= 1.0)


def test_unit_ball_is_deterministic_per_seed():
    np.testing.assert_array_equal(sample_unit_ball(4, 5, 11), sample_unit_ball(4, 5, 11))


def test_unit_ball_is_centered_in_one_dimension():
    u = sample_unit_ball(1, 10000, 3)
    assert abs(float(u.mean())) <= 3.0 / math.sqrt(3.0 * 10000)
    assert np.all(np.abs(u) <= 1.0)


def test_unit_ball_rejects_bad_sizes():
    with pytest.raises(InvalidInputError):
        sample_unit_ball(0, 3)


def test_subgradient_of_smooth_function(gs_params):
    result = approx_subgradient(get_objective("quadratic"), [1.0, 0.0], 1e-6, gs_params, 0)
    np.testing.assert_allclose(result.point, [2.0, 0.0], atol=1e-4)


def test_subgradient_at_kink_is_small():
    params = GsParams(m=50)
    result = approx_subgradient(_abs_objective(), [0.0], 0.1, params, 0)
    assert result.norm <= 0.2


def test_subgradient_in_constant_gradient_region(gs_params):
    result = approx_subgradient(_abs_objective(), [1.0], 0.1, gs_params, 0)
    assert result.point[0] == 1.0


def test_subgradient_average_mode(gs_params):
    result = approx_subgradient(_abs_objective(), [1.0], 0.1, gs_params.with_mode("average"), 0)
    assert result.method == "average"
    assert result.point[0] == 1.0


def test_subgradient_requires_finite_point(gs_params):
    wall = FunctionObjective(lambda x: math.inf if x[0] < 0.0 else float(x[0]), np.ones_like, 1)
    with pytest.raises(InfeasiblePointError):
        approx_subgradient(wall, [-1.0], 0.1, gs_params, 0)


def test_sampling_exhausted_on_isolated_point(gs_params):
    spike = FunctionObjective(lambda x: 0.0 if x[0] == 0.0 else math.inf, np.zeros_like, 1)
    with pytest.raises(SamplingExhaustedError):
        approx_subgradient(spike, [0.0], 0.1, gs_params, 0)


def test_sample_size_rule():
    assert resolve_sample_size(GsParams(), 4) == 5
    with pytest.raises(InvalidInputError):
        resolve_sample_size(GsParams(m=2), 4)
    with pytest.warns(UserWarning):
        assert resolve_sample_size(GsParams(m=2, m_override=True), 4) == 2


def test_armijo_accepts_full_step():
    result = armijo_search(_square_objective(), [1.0], [-1.0], 2.0, 0.1, 30)
    assert result.success
    assert result.t == 1.0
    assert result.objective == 0.0


def test_armijo_fails_on_ascent():
    result = armijo_search(_square_objective(), [1.0], [1.0], 2.0, 0.1, 30)
    assert not result.success


def test_armijo_never_accepts_infinite_value():
    wall = FunctionObjective(lambda x: math.inf if x[0] < 0.0 else float(x[0]), np.ones_like, 1)
    result = armijo_search(wall, [0.1], [-1.0], 1.0, 0.1, 30)
    assert result.success
    assert result.t <= 1.0 / 16.0
    assert 0.1 - result.t >= 0.0
    assert math.isfinite(result.objective)


def test_armijo_requires_unit_direction():
    with pytest.raises(InvalidInputError):
        armijo_search(_square_objective(), [1.0], [-2.0], 2.0, 0.1, 30)


def test_minimize_shifted_quadratic(gs_params):
    target = np.array([2.0, -1.0])
    objective = FunctionObjective(lambda x: float((x - target) @ (x - target)), lambda x: 2.0 * (x - target), 2)
    x, trace = gsda_minimize(objective, [0.0, 0.0], gs_params)
    assert np.linalg.norm(x - target) <= 1e-2
    assert trace.converged
    _assert_descent_invariants(trace, gs_params)


def test_minimize_l1(gs_params):
    x, trace = gsda_minimize(get_objective("l1"), [3.0, 4.0], gs_params)
    assert np.linalg.norm(x) <= 1e-2
    _assert_descent_invariants(trace, gs_params)


@pytest.mark.slow
def test_minimize_nonsmooth_rosenbrock(gs_params):
    x, trace = gsda_minimize(get_objective("nsrosenbrock"), [-1.0, 1.0], gs_params)
    assert np.linalg.norm(x - np.ones(2)) <= 1e-2
    assert trace.n_iter <= gs_params.max_iter
    _assert_descent_invariants(trace, gs_params)


def test_minimize_is_reproducible(gs_params):
    objective = get_objective("l1")
    x1, trace1 = gsda_minimize(objective, [3.0, 4.0], gs_params)
    x2, trace2 = gsda_minimize(objective, [3.0, 4.0], gs_params)
    np.testing.assert_array_equal(x1, x2)
    assert trace1.to_rows() == trace2.to_rows()


def test_minimize_threaded_matches_serial(gs_params):
    objective = get_objective("quadratic", 3)
    x1, trace1 = gsda_minimize(objective, [1.0, -2.0, 0.5], gs_params)
    x2, trace2 = gsda_minimize(objective, [1.0, -2.0, 0.5], GsParams(n_workers=3))
    np.testing.assert_allclose(x1, x2, atol=1e-12)
    np.testing.assert_allclose(trace1.accepted_objectives(), trace2.accepted_objectives(), atol=1e-12)


def test_minimize_reports_non_convergence():
    with pytest.warns(NonConvergenceWarning):
        _, trace = gsda_minimize(get_objective("l1"), [3.0, 4.0], GsParams(max_iter=3))
    assert not trace.converged
    assert trace.n_iter == 3


def test_minimize_rejects_infeasible_start(gs_params):
    wall = FunctionObjective(lambda x: math.inf if x[0] < 0.0 else float(x[0]), np.ones_like, 1)
    with pytest.raises(InfeasiblePointError):
        gsda_minimize(wall, [-1.0], gs_params)
