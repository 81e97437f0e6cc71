# -*- coding: utf-8 -*-


import warnings
from abc import ABC, abstractmethod
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, Optional, Union

import msgspec
import numpy as np
import numpy.typing as npt

from .configs import GsParams
from .errors import (
    InfeasiblePointError,
    InvalidInputError,
    NonConvergenceWarning,
    SamplingExhaustedError,
)
from .minnorm import GradientSet, MinNormResult, average_fallback, min_norm_or_average
from .utils.logging import get_logger
from .utils.misc import as_float_vector

_logger = get_logger(__name__)

RngLike = Union[np.random.Generator, int, None]
TraceEvent = Literal["step", "stationary", "line_search_failed", "sampling_exhausted"]

# resampling budget per requested sample
_RESAMPLE_FACTOR = 10


class Objective(ABC):
    """
    A locally Lipschitz function, differentiable on an open dense set.

    ``eval`` may return ``+inf`` to mark points outside the domain; ``grad`` is
    only called where ``eval`` is finite. Implementations must tolerate
    concurrent calls on distinct inputs.
    """

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def eval(self, x: np.ndarray) -> float:
        pass

    @abstractmethod
    def grad(self, x: np.ndarray) -> np.ndarray:
        pass

    def eval_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        """Evaluate every row of ``xs``; row order is preserved."""
        if n_workers > 1 and len(xs) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as executor:
                return np.fromiter(executor.map(self.eval, xs), dtype=np.float64, count=len(xs))
        return np.fromiter((self.eval(row) for row in xs), dtype=np.float64, count=len(xs))

    def grad_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        if n_workers > 1 and len(xs) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as executor:
                rows = list(executor.map(self.grad, xs))
        else:
            rows = [self.grad(row) for row in xs]
        return np.vstack(rows) if rows else np.empty((0, self.dim))


class FunctionObjective(Objective):
    def __init__(
        self,
        fun: Callable[[np.ndarray], float],
        grad: Callable[[np.ndarray], npt.ArrayLike],
        dim: int,
        name: str = "function",
    ) -> None:
        self._fun = fun
        self._grad = grad
        self._dim = dim
        self.name = name

    @property
    def dim(self) -> int:
        return self._dim

    def eval(self, x: np.ndarray) -> float:
        return float(self._fun(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._grad(x), dtype=np.float64).reshape(self._dim)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r}, dim={self._dim})"


class TraceRecord(msgspec.Struct, frozen=True):
    iteration: int
    objective: float
    g_norm: float
    slope: float
    eps: float
    tau: float
    step: float
    method: str
    backtracks: int
    event: TraceEvent
    accepted: bool


@dataclass
class FitTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    @property
    def n_iter(self) -> int:
        return len(self.records)

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective if self.records else float("nan")

    def accepted_objectives(self) -> np.ndarray:
        return np.array([rec.objective for rec in self.records if rec.accepted])

    def to_rows(self) -> list[dict[str, Any]]:
        return [msgspec.structs.asdict(rec) for rec in self.records]


@dataclass(frozen=True)
class SearchDirection:
    """
    Displacement proposed for one iteration.

    ``slope`` is the decrease rate used by the sufficient-decrease rule and by
    the stationarity test; ``g_norm`` is the norm of the raw sampled
    subgradient, kept for the trace.
    """

    step: np.ndarray
    slope: float
    g_norm: float
    method: str
    payload: Any = None


@dataclass(frozen=True)
class LineSearchResult:
    success: bool
    t: float
    objective: float
    backtracks: int


@dataclass(frozen=True)
class SampledGradients:
    points: np.ndarray
    gradients: np.ndarray
    n_rejected: int


DirectionFn = Callable[[np.ndarray, float, np.random.Generator], SearchDirection]
AcceptFn = Callable[[np.ndarray, float, SearchDirection], None]
PerturbFn = Callable[[np.ndarray], np.ndarray]


def _as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_unit_ball(n: int, m: int, rng: RngLike = None) -> np.ndarray:
    """
    ``m`` points uniform on the solid unit ball of ``R^n``, shape ``(m, n)``.

    Gaussian directions scaled by radius ``U ** (1 / n)``.
    """
    if n < 1 or m < 1:
        err_msg = f"`n` and `m` must be positive integers, but got n={n}, m={m}."
        raise InvalidInputError(err_msg)
    gen = _as_rng(rng)
    directions = gen.standard_normal((m, n))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = gen.random((m, 1)) ** (1.0 / n)
    return directions / norms * radii


def resolve_sample_size(params: GsParams, dim: int) -> int:
    if params.m is None:
        return dim + 1
    if params.m < dim + 1:
        if not params.m_override:
            err_msg = (
                f"Sample size m={params.m} is below dim+1={dim + 1}; set `m_override` to run with fewer samples."
            )
            raise InvalidInputError(err_msg)
        warn_msg = f"Sampling m={params.m} gradients in dimension {dim}, below dim+1={dim + 1}."
        _logger.warning("> %s", warn_msg)
        warnings.warn(warn_msg, UserWarning, stacklevel=3)
    return params.m


def sample_gradients(
    obj: Objective,
    x: np.ndarray,
    eps: float,
    m: int,
    rng: np.random.Generator,
    n_workers: int = 1,
    perturb: Optional[PerturbFn] = None,
) -> SampledGradients:
    """
    Gradients at ``m`` points drawn from the ``eps``-ball around ``x``.

    Points where the objective is infinite or the gradient is not finite are
    redrawn, at most ``10 * m`` draws in total. ``perturb`` maps unit-ball
    draws to displacements (identity by default).
    """
    budget = _RESAMPLE_FACTOR * m
    points = np.empty((m, x.size))
    gradients = np.empty((m, x.size))
    missing = np.arange(m)
    n_drawn = 0
    while missing.size:
        if n_drawn + missing.size > budget:
            err_msg = (
                f"Exhausted {budget} draws with {missing.size} of {m} sampled gradients infeasible at eps={eps:g}."
            )
            raise SamplingExhaustedError(err_msg)
        u = sample_unit_ball(x.size, missing.size, rng)
        n_drawn += missing.size
        displacement = u if perturb is None else perturb(u)
        candidates = x + eps * displacement
        values = obj.eval_batch(candidates, n_workers=n_workers)
        feasible = np.isfinite(values)
        if feasible.all():
            cand_grads = obj.grad_batch(candidates, n_workers=n_workers)
        else:
            cand_grads = np.full_like(candidates, np.nan)
            if feasible.any():
                cand_grads[feasible] = obj.grad_batch(candidates[feasible], n_workers=n_workers)
        feasible &= np.all(np.isfinite(cand_grads), axis=1)
        filled = missing[feasible]
        points[filled] = candidates[feasible]
        gradients[filled] = cand_grads[feasible]
        missing = missing[~feasible]
    return SampledGradients(points=points, gradients=gradients, n_rejected=n_drawn - m)


def combine_gradients(gset: GradientSet, params: GsParams) -> MinNormResult:
    if params.subgradient_mode == "average":
        return average_fallback(gset)
    return min_norm_or_average(gset, tol=params.qp_tol)


def approx_subgradient(
    obj: Objective,
    x: npt.ArrayLike,
    eps: float,
    params: GsParams,
    rng: RngLike = None,
) -> MinNormResult:
    """
    Approximate the Clarke ε-subgradient of ``obj`` at ``x``.

    Collects the gradient at ``x`` plus ``m`` gradients sampled in the
    ``eps``-ball and returns their min-norm convex combination (``qp``, the
    default) or their average.

    Raises:
        InfeasiblePointError: ``obj`` is not finite at ``x``.
        SamplingExhaustedError: too many sampled points fell outside the domain.
    """
    xvec = as_float_vector(x, "x")
    if not np.isfinite(obj.eval(xvec)):
        err_msg = "Cannot approximate a subgradient where the objective is not finite."
        raise InfeasiblePointError(err_msg)
    grad0 = obj.grad(xvec)
    if not np.all(np.isfinite(grad0)):
        err_msg = "Gradient at the iterate holds non-finite entries."
        raise InfeasiblePointError(err_msg)

    m = resolve_sample_size(params, obj.dim)
    sampled = sample_gradients(obj, xvec, eps, m, _as_rng(rng), n_workers=params.n_workers)
    if sampled.n_rejected:
        _logger.debug("> Rejected %d infeasible sample points at eps=%g", sampled.n_rejected, eps)
    gset = GradientSet(np.vstack([grad0[None, :], sampled.gradients]))
    return combine_gradients(gset, params)


def armijo_search(
    obj: Objective,
    x: npt.ArrayLike,
    d: npt.ArrayLike,
    g_norm: float,
    beta: float,
    max_backtracks: int,
    f0: Optional[float] = None,
    unit_step: bool = True,
) -> LineSearchResult:
    """
    Backtracking over ``t = 1, 1/2, 1/4, ...`` (at most ``max_backtracks`` halvings).

    Accepts the first ``t`` with ``f(x + t d) < f(x) - beta * t * g_norm`` and a
    finite trial value. A failed search is a normal outcome.
    """
    xvec = as_float_vector(x, "x")
    dvec = as_float_vector(d, "d")
    if unit_step and abs(float(np.linalg.norm(dvec)) - 1.0) > 1e-10:
        err_msg = f"Search direction must have unit norm, got {np.linalg.norm(dvec)!r}."
        raise InvalidInputError(err_msg)
    if g_norm <= 0.0:
        err_msg = f"`g_norm` must be positive, but got {g_norm}."
        raise InvalidInputError(err_msg)
    fx = obj.eval(xvec) if f0 is None else f0

    t = 1.0
    for n_back in range(max_backtracks + 1):
        trial = obj.eval(xvec + t * dvec)
        if np.isfinite(trial) and trial < fx - beta * t * g_norm:
            return LineSearchResult(success=True, t=t, objective=trial, backtracks=n_back)
        t *= 0.5
    return LineSearchResult(success=False, t=0.0, objective=fx, backtracks=max_backtracks)


def descend(
    obj: Objective,
    x0: npt.ArrayLike,
    params: GsParams,
    direction_fn: DirectionFn,
    on_accept: Optional[AcceptFn] = None,
    unit_step: bool = True,
    label: str = "gsda",
) -> tuple[np.ndarray, FitTrace]:
    """
    The outer gradient-sampling loop shared by every fitting routine.

    ``direction_fn(x, eps, rng)`` proposes a step. The radius and tolerance are
    shrunk by ``mu`` and ``lambda`` whenever the slope drops below the
    tolerance, the line search fails, or sampling is exhausted. Stops once
    both fall below their floors, or after ``max_iter`` iterations.
    """
    x = as_float_vector(x0, "x0").copy()
    fx = obj.eval(x)
    if not np.isfinite(fx):
        err_msg = "The starting point must have a finite objective value."
        raise InfeasiblePointError(err_msg)

    rng = np.random.default_rng(params.seed)
    eps, tau = params.eps0, params.tau0
    trace = FitTrace()

    def _record(it: int, direction: Optional[SearchDirection], event: TraceEvent, t: float, n_back: int) -> None:
        trace.append(
            TraceRecord(
                iteration=it,
                objective=fx,
                g_norm=direction.g_norm if direction is not None else float("nan"),
                slope=direction.slope if direction is not None else float("nan"),
                eps=eps,
                tau=tau,
                step=t,
                method=direction.method if direction is not None else "none",
                backtracks=n_back,
                event=event,
                accepted=event == "step",
            )
        )

    _logger.info("> Starting %s descent in dimension %d, f(x0)=%.6g", label, obj.dim, fx)
    for it in range(1, params.max_iter + 1):
        if eps <= params.eps_min and tau <= params.tau_min:
            trace.converged = True
            break

        event: TraceEvent
        direction: Optional[SearchDirection] = None
        n_back = 0
        try:
            direction = direction_fn(x, eps, rng)
        except SamplingExhaustedError as e:
            _logger.debug("> %s", e)
            event = "sampling_exhausted"
        else:
            # slope is the norm of the direction before normalization (smoothed for local scoring)
            if not direction.slope > tau:
                event = "stationary"
            else:
                search = armijo_search(
                    obj,
                    x,
                    direction.step,
                    direction.slope,
                    params.beta,
                    params.max_backtracks,
                    f0=fx,
                    unit_step=unit_step,
                )
                n_back = search.backtracks
                if search.success:
                    x = x + search.t * direction.step
                    fx = search.objective
                    _record(it, direction, "step", search.t, n_back)
                    if on_accept is not None:
                        on_accept(x, search.t, direction)
                    continue
                event = "line_search_failed"

        _record(it, direction, event, 0.0, n_back)
        eps *= params.mu
        tau *= params.lam
        _logger.debug("> iter %d: %s, eps -> %.3g, tau -> %.3g", it, event, eps, tau)
    else:
        trace.converged = eps <= params.eps_min and tau <= params.tau_min

    if trace.converged:
        _logger.info("> %s converged after %d iterations, f=%.10g", label, trace.n_iter, fx)
    else:
        warn_msg = f"{label} stopped at max_iter={params.max_iter} with eps={eps:.3g}, tau={tau:.3g}."
        _logger.warning("> %s", warn_msg)
        warnings.warn(warn_msg, NonConvergenceWarning, stacklevel=2)
    return x, trace


def gsda_minimize(obj: Objective, x0: npt.ArrayLike, params: GsParams) -> tuple[np.ndarray, FitTrace]:
    """Minimize ``obj`` from ``x0`` by gradient sampling, moving along ``-ĝ/‖ĝ‖``."""
    params = params.with_mode("qp")
    resolve_sample_size(params, obj.dim)

    def _direction(x: np.ndarray, eps: float, rng: np.random.Generator) -> SearchDirection:
        result = approx_subgradient(obj, x, eps, params, rng)
        norm = result.norm
        step = -result.point / norm if norm > 0.0 else np.zeros_like(result.point)
        return SearchDirection(step=step, slope=norm, g_norm=norm, method=result.method)

    return descend(obj, x0, params, _direction)
