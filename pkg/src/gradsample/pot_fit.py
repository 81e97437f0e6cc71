# -*- coding: utf-8 -*-


import functools
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt

from .configs import FunctionalSpec, GsParams, SmootherSpec
from .errors import InvalidInputError, SamplingExhaustedError, SingularBlockError
from .gpd import (
    JacobianBlocks,
    Lambda,
    functional_map,
    gpd_loglik_grad,
    gpd_loglik_grad_terms,
    gpd_loglik_terms,
    jacobian_blocks,
    jacobian_entries,
    return_level,
)
from .gs_engine import (
    FitTrace,
    Objective,
    RngLike,
    SearchDirection,
    combine_gradients,
    descend,
    resolve_sample_size,
    sample_gradients,
)
from .minnorm import GradientSet, MinNormResult
from .smoothing import AdditiveFit, AdditiveProjector
from .utils.logging import get_logger
from .utils.misc import as_float_vector

_logger = get_logger(__name__)

# method-of-moments shape is clamped to this interval
_KAPPA_INIT_RANGE = (-0.4, 0.9)


@dataclass(frozen=True)
class PotState:
    lam: Lambda
    theta: tuple[np.ndarray, np.ndarray]
    blocks: JacobianBlocks
    spec: FunctionalSpec

    @classmethod
    def from_lambda(cls, lam: Lambda, spec: FunctionalSpec) -> "PotState":
        return cls(lam=lam, theta=functional_map(lam, spec), blocks=jacobian_blocks(lam, spec), spec=spec)

    def theta_vector(self) -> np.ndarray:
        return np.concatenate(self.theta)


@dataclass
class PotModel:
    state: PotState
    decompositions: tuple[AdditiveFit, AdditiveFit]
    projector: AdditiveProjector
    trace: FitTrace = field(default_factory=FitTrace)

    @property
    def spec(self) -> FunctionalSpec:
        return self.state.spec

    @property
    def converged(self) -> bool:
        return self.trace.converged

    @property
    def loglik(self) -> float:
        return -self.trace.final_objective

    @property
    def names(self) -> tuple[str, str]:
        return self.spec.names


class NegLogLikObjective(Objective):
    """
    ``-l(Lambda)`` over the stacked vector ``(eta, kappa)`` of length ``2n``.

    Under ``var_es`` any ``kappa >= 1`` is outside the domain, so the expected
    shortfall stays defined along every accepted step.
    """

    def __init__(self, y: np.ndarray, spec: FunctionalSpec) -> None:
        self.y = y
        self.spec = spec

    @property
    def dim(self) -> int:
        return 2 * int(self.y.size)

    def _values(self, xs: np.ndarray) -> np.ndarray:
        lam = Lambda.from_vector(xs)
        values = -gpd_loglik_terms(lam.eta, lam.kappa, self.y).sum(axis=-1)
        if self.spec.pair == "var_es":
            values = np.where(np.any(lam.kappa >= 1.0, axis=-1), np.inf, values)
        return values

    def eval(self, x: np.ndarray) -> float:
        return float(self._values(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return -gpd_loglik_grad(Lambda.from_vector(x), self.y)

    def eval_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        return self._values(xs)

    def grad_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        lam = Lambda.from_vector(xs)
        d_eta, d_kappa = gpd_loglik_grad_terms(lam.eta, lam.kappa, self.y)
        return -np.concatenate([d_eta, d_kappa], axis=-1)


def negative_loglik_objective(y: npt.ArrayLike, spec: FunctionalSpec) -> NegLogLikObjective:
    return NegLogLikObjective(_check_excesses(y), spec)


def _check_excesses(y: npt.ArrayLike) -> np.ndarray:
    yvec = as_float_vector(y, "y")
    if not np.all(np.isfinite(yvec)) or np.any(yvec <= 0.0):
        err_msg = "Excesses over the threshold must be finite and positive."
        raise InvalidInputError(err_msg)
    return yvec


def moment_start(y: np.ndarray) -> tuple[float, float]:
    """Method-of-moments ``(sigma, kappa)``, clamped and nudged inside the support."""
    mean = float(y.mean())
    var = float(y.var(ddof=1)) if y.size > 1 else 0.0
    ratio = mean**2 / var if var > 0.0 else 1.0
    kappa = float(np.clip(0.5 * (1.0 - ratio), *_KAPPA_INIT_RANGE))
    sigma = 0.5 * mean * (ratio + 1.0)
    y_max = float(y.max())
    if kappa < 0.0 and 1.0 + kappa * y_max / sigma <= 0.0:
        kappa = -0.5 * sigma / y_max
    return sigma, kappa


def _pull_back(blocks: JacobianBlocks, n: int, u: np.ndarray) -> np.ndarray:
    d_eta, d_kappa = blocks.lambda_step(u[:, :n], u[:, n:])
    return np.concatenate([d_eta, d_kappa], axis=-1)


def approx_subgradient_theta(
    state: PotState,
    y: npt.ArrayLike,
    eps: float,
    gs: GsParams,
    rng: RngLike = None,
    objective: Optional[NegLogLikObjective] = None,
) -> MinNormResult:
    """
    Sampled log-likelihood gradient expressed in the functional coordinates.

    Lambda-gradients of ``l`` at the state and at points of the ``eps``-ball
    are mapped through the block chain rule and combined (average by default).
    By default every sample uses the Jacobian of the state and unit-ball
    draws perturb Lambda directly; with ``per_sample_jacobian`` the draws are
    pulled back through the block inverse and each sampled gradient uses the
    Jacobian at its own point.
    """
    yvec = as_float_vector(y, "y")
    obj = objective if objective is not None else negative_loglik_objective(yvec, state.spec)
    params = gs.with_mode("average")
    n = yvec.size
    x = state.lam.as_vector()
    m = resolve_sample_size(params, 2 * n)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    perturb = functools.partial(_pull_back, state.blocks, n) if params.per_sample_jacobian else None
    sampled = sample_gradients(obj, x, eps, m, gen, n_workers=params.n_workers, perturb=perturb)
    lambda_grads = np.vstack([gpd_loglik_grad(state.lam, yvec)[None, :], -sampled.gradients])

    blocks = state.blocks
    if params.subgradient_mode == "average" and not params.per_sample_jacobian:
        # the chain rule is linear and shared, so averaging first gives the same point
        mean_grad = lambda_grads.mean(axis=0)
        g_first, g_second = blocks.theta_gradient(mean_grad[:n], mean_grad[n:])
        point = np.concatenate([g_first, g_second])
        if not np.all(np.isfinite(point)):
            err_msg = "Non-finite functional gradient at a sampled point."
            raise SamplingExhaustedError(err_msg)
        n_grads = lambda_grads.shape[0]
        return MinNormResult(
            point=point,
            weights=np.full(n_grads, 1.0 / n_grads),
            norm=float(np.linalg.norm(point)),
            method="average",
        )
    if params.per_sample_jacobian:
        sample_lam = Lambda.from_vector(sampled.points)
        blocks = jacobian_entries(
            np.vstack([state.lam.eta[None, :], sample_lam.eta]),
            np.vstack([state.lam.kappa[None, :], sample_lam.kappa]),
            state.spec,
        )
        if blocks.singular_indices().size:
            err_msg = "Singular Jacobian block at a sampled point."
            raise SamplingExhaustedError(err_msg)
    g_first, g_second = blocks.theta_gradient(lambda_grads[:, :n], lambda_grads[:, n:])
    theta_grads = np.concatenate([g_first, g_second], axis=-1)
    if not np.all(np.isfinite(theta_grads)):
        err_msg = "Non-finite functional gradient at a sampled point."
        raise SamplingExhaustedError(err_msg)
    return combine_gradients(GradientSet(theta_grads), params)


def fit_pot_additive(
    y: npt.ArrayLike,
    covariates: npt.ArrayLike,
    spec: FunctionalSpec,
    specs: Sequence[SmootherSpec],
    gs: Optional[GsParams] = None,
) -> PotModel:
    """
    Smooth GPD fit with additive structure on a pair of tail functionals.

    Every iteration maps sampled log-likelihood gradients to the functional
    coordinates, smooths each half on the additive space, and steps in
    ``(eta, kappa)`` along the block-inverse image of the normalized smoothed
    direction. Steps leaving the GPD support fail the line search.

    Raises:
        InvalidInputError: non-positive excesses, or coinciding levels under ``var_var``.
        SingularBlockError: a Jacobian block became singular during the fit.
    """
    yvec = _check_excesses(y)
    n = yvec.size
    if spec.pair == "var_var" and spec.scale_factors[0] == spec.scale_factors[1]:
        err_msg = f"The two levels of a var_var pair must differ, got {list(spec.levels)}."
        raise InvalidInputError(err_msg)
    if n < len(specs) + 2:
        err_msg = f"Need at least {len(specs) + 2} excesses for {len(specs)} smoother(s), got {n}."
        raise InvalidInputError(err_msg)
    wmat = np.asarray(covariates, dtype=np.float64).reshape(n, -1)

    params = (gs if gs is not None else GsParams()).with_mode("average")
    projector = AdditiveProjector(wmat, specs)
    objective = negative_loglik_objective(yvec, spec)
    resolve_sample_size(params, 2 * n)

    sigma0, kappa0 = moment_start(yvec)
    lam0 = Lambda.from_sigma(np.full(n, sigma0), np.full(n, kappa0))
    _logger.info(
        "> Fitting %s functionals on %d excesses with %d smoother(s), start sigma=%.4g kappa=%.4g",
        spec.pair,
        n,
        len(specs),
        sigma0,
        kappa0,
    )

    def _direction(x: np.ndarray, eps: float, rng: np.random.Generator) -> SearchDirection:
        try:
            state = PotState.from_lambda(Lambda.from_vector(x), spec)
        except SingularBlockError as e:
            _logger.error("> Aborting the fit: %s (observations %s)", e, list(e.indices[:10]))
            raise
        subgrad = approx_subgradient_theta(state, yvec, eps, params, rng, objective=objective)
        first = projector.project(subgrad.point[:n])
        second = projector.project(subgrad.point[n:])
        smoothed = np.concatenate([first.fitted, second.fitted])
        norm = float(np.linalg.norm(smoothed))
        if norm == 0.0:
            return SearchDirection(step=np.zeros(2 * n), slope=0.0, g_norm=subgrad.norm, method=subgrad.method)
        direction = smoothed / norm
        d_eta, d_kappa = state.blocks.lambda_step(direction[:n], direction[n:])
        return SearchDirection(
            step=np.concatenate([d_eta, d_kappa]), slope=norm, g_norm=subgrad.norm, method=subgrad.method
        )

    x, trace = descend(objective, lam0.as_vector(), params, _direction, unit_step=False, label=f"pot({spec.pair})")
    state = PotState.from_lambda(Lambda.from_vector(x), spec)
    decompositions = (projector.project(state.theta[0]), projector.project(state.theta[1]))
    return PotModel(state=state, decompositions=decompositions, projector=projector, trace=trace)


def return_levels(model: PotModel, levels: Sequence[float]) -> np.ndarray:
    """Return levels at extra tail probabilities from the fitted ``(sigma, kappa)``, shape ``(n, len(levels))``."""
    exceed = model.spec.exceed_prob
    if any(level <= 0.0 for level in levels):
        err_msg = f"Tail levels must be positive, got {list(levels)}."
        raise InvalidInputError(err_msg)
    lam = model.state.lam
    columns = [return_level(lam.eta, lam.kappa, level / exceed) for level in levels]
    if not columns:
        return np.zeros((lam.n, 0))
    return np.column_stack(columns)
