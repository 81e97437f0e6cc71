# tests/pot/test_gpd.py
import math

import numpy as np
import pytest
from scipy import optimize, stats

from gradsample.configs import FunctionalSpec
from gradsample.diagnostics import gradcheck, jacobian_check
from gradsample.errors import FunctionalUndefinedError, InfeasiblePointError, SingularBlockError
from gradsample.gpd import (
    Lambda,
    functional_map,
    gpd_loglik,
    gpd_loglik_grad,
    gpd_loglik_grad_terms,
    gpd_loglik_terms,
    jacobian_blocks,
    return_level,
)
from gradsample.pot_fit import negative_loglik_objective


def _lam(sigma, kappa):
    return Lambda.from_sigma(np.atleast_1d(sigma), np.atleast_1d(kappa))


def test_loglik_examples():
    assert gpd_loglik(_lam(1.0, 0.0), [1.0]) == pytest.approx(-1.0)
    assert gpd_loglik(_lam(1.0, 1e-12), [1.0]) == pytest.approx(-1.0)
    assert gpd_loglik(_lam(1.0, 1.0), [1.0]) == pytest.approx(-2.0 * math.log(2.0))
    assert gpd_loglik(_lam(1.0, -0.5), [3.0]) == -math.inf


def test_loglik_matches_scipy(rng):
    y = rng.exponential(size=20)
    sigma = rng.uniform(0.5, 3.0, 20)
    kappa = rng.uniform(-0.2, 0.8, 20)
    lam = Lambda.from_sigma(sigma, kappa)
    expected = stats.genpareto.logpdf(y, c=kappa, scale=sigma)
    np.testing.assert_allclose(gpd_loglik_terms(lam.eta, lam.kappa, y), expected, rtol=1e-10)


def test_loglik_grad_matches_central_differences(var_es_spec):
    lam = _lam(2.0, 0.2)
    report = gradcheck(negative_loglik_objective([1.5], var_es_spec), lam.as_vector())
    assert report.max_error < 1e-5


def test_loglik_grad_at_random_feasible_points(rng, var_es_spec):
    for _ in range(100):
        y = rng.uniform(0.01, 3.0, 5)
        lam = Lambda.from_sigma(rng.uniform(0.5, 3.0, 5), rng.uniform(-0.1, 0.6, 5))
        report = gradcheck(negative_loglik_objective(y, var_es_spec), lam.as_vector())
        assert report.max_error < 1e-5


def test_kappa_series_straddles_zero():
    h = 1e-5
    eta, y = np.zeros(1), np.ones(1)
    _, d_kappa = gpd_loglik_grad_terms(eta, np.zeros(1), y)
    numeric = (gpd_loglik_terms(eta, np.full(1, h), y) - gpd_loglik_terms(eta, np.full(1, -h), y)) / (2.0 * h)
    assert d_kappa[0] == pytest.approx(-0.5)
    assert d_kappa[0] == pytest.approx(numeric[0], abs=1e-4)


def test_loglik_grad_requires_support():
    with pytest.raises(InfeasiblePointError):
        gpd_loglik_grad(_lam(1.0, -0.5), [3.0])


def test_gradient_vanishes_at_oracle_mle(gpd_sample):
    y = gpd_sample(500, seed=3)

    def _neg(params):
        log_sigma, kappa = params
        return -float(np.sum(stats.genpareto.logpdf(y, c=kappa, scale=math.exp(log_sigma))))

    kappa0, _, sigma0 = stats.genpareto.fit(y, floc=0.0)
    oracle = optimize.minimize(
        _neg,
        [math.log(sigma0), kappa0],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000},
    )
    log_sigma, kappa = oracle.x
    grad = gpd_loglik_grad(Lambda(np.full(y.size, log_sigma), np.full(y.size, kappa)), y)
    assert abs(grad[: y.size].sum()) < 1e-3
    assert abs(grad[y.size :].sum()) < 1e-3


def test_functional_map_examples():
    spec = FunctionalSpec(pair="var_es", levels=(0.01,), exceed_prob=0.1)
    theta, _ = functional_map(_lam(2.0, 0.0), spec)
    assert theta[0] == pytest.approx(-2.0 * math.log(0.1))
    theta, zeta = functional_map(_lam(1.0, 0.5), spec)
    assert theta[0] == pytest.approx(4.32456, rel=1e-5)
    assert zeta[0] == pytest.approx(10.64911, rel=1e-5)


def test_return_level_at_threshold_is_zero():
    kappa = np.array([-0.3, 0.0, 0.4, 0.9])
    np.testing.assert_allclose(return_level(np.zeros(4), kappa, 1.0), 0.0, atol=1e-15)


def test_functional_map_is_continuous_at_zero_shape(var_es_spec):
    theta_pos, zeta_pos = functional_map(_lam(1.7, 1e-8), var_es_spec)
    theta_neg, zeta_neg = functional_map(_lam(1.7, -1e-8), var_es_spec)
    theta_0, zeta_0 = functional_map(_lam(1.7, 0.0), var_es_spec)
    assert abs(theta_pos[0] - theta_neg[0]) <= 1e-6 * abs(theta_0[0])
    assert abs(zeta_pos[0] - zeta_neg[0]) <= 1e-6 * abs(zeta_0[0])


def test_expected_shortfall_needs_shape_below_one(var_es_spec):
    with pytest.raises(FunctionalUndefinedError):
        functional_map(_lam([1.0, 1.0], [0.5, 1.0]), var_es_spec)
    with pytest.raises(FunctionalUndefinedError):
        jacobian_blocks(_lam(1.0, 1.2), var_es_spec)


def test_jacobian_examples(var_es_spec):
    blocks = jacobian_blocks(_lam(2.0, 0.0), var_es_spec)
    assert blocks.a[0] == pytest.approx(-2.0 * math.log(0.1))
    assert jacobian_check(_lam(1.0, 0.3), var_es_spec).max_error < 1e-5


def test_jacobian_entries_at_random_points(rng, var_es_spec, var_var_spec):
    for _ in range(100):
        lam = Lambda.from_sigma(rng.uniform(0.5, 3.0, 4), rng.uniform(-0.3, 0.7, 4))
        assert jacobian_check(lam, var_es_spec).max_error < 1e-5
        assert jacobian_check(lam, var_var_spec).max_error < 1e-5


def test_block_inverse_is_exact(rng, var_es_spec):
    lam = Lambda.from_sigma(rng.uniform(0.5, 3.0, 10), rng.uniform(-0.3, 0.7, 10))
    blocks = jacobian_blocks(lam, var_es_spec)
    products = blocks.matrices() @ blocks.inverse_matrices()
    np.testing.assert_allclose(products, np.broadcast_to(np.eye(2), products.shape), atol=1e-10)


def test_coinciding_levels_are_singular():
    spec = FunctionalSpec(pair="var_var", levels=(0.01, 0.01), exceed_prob=0.1)
    with pytest.raises(SingularBlockError) as excinfo:
        jacobian_blocks(_lam([1.0, 2.0], [0.1, 0.2]), spec)
    assert excinfo.value.indices == (0, 1)


def test_return_levels_are_ordered(rng, var_var_spec):
    lam = Lambda.from_sigma(rng.uniform(0.5, 3.0, 50), rng.uniform(-0.3, 0.7, 50))
    lower, upper = functional_map(lam, var_var_spec)
    assert np.all(upper > lower)


def test_block_maps_match_matrix_solves(rng, var_var_spec):
    lam = Lambda.from_sigma(rng.uniform(0.5, 3.0, 10), rng.uniform(-0.3, 0.7, 10))
    blocks = jacobian_blocks(lam, var_var_spec)
    g = rng.standard_normal((3, 10, 2))
    matrices = np.broadcast_to(blocks.matrices(), (3, 10, 2, 2))

    g_first, g_second = blocks.theta_gradient(g[..., 0], g[..., 1])
    expected = np.linalg.solve(np.swapaxes(matrices, -1, -2), g[..., None])[..., 0]
    np.testing.assert_allclose(np.stack([g_first, g_second], axis=-1), expected, rtol=1e-8, atol=1e-10)

    d_eta, d_kappa = blocks.lambda_step(g[..., 0], g[..., 1])
    expected = np.linalg.solve(matrices, g[..., None])[..., 0]
    np.testing.assert_allclose(np.stack([d_eta, d_kappa], axis=-1), expected, rtol=1e-8, atol=1e-10)


@pytest.mark.filterwarnings("error")
def test_loglik_far_outside_support_is_silent():
    eta = np.array([-800.0, -800.0, 0.0])
    kappa = np.array([0.0, 0.3, 1e-9])
    y = np.array([1.0, 1.0, 2.0])
    terms = gpd_loglik_terms(eta, kappa, y)
    assert np.all(np.isneginf(terms[:2]))
    assert terms[2] == pytest.approx(-2.0)

    d_eta, d_kappa = gpd_loglik_grad_terms(eta, kappa, y)
    assert d_eta[2] == pytest.approx(1.0)
    assert d_kappa[2] == pytest.approx(0.0, abs=1e-6)
