# -*- coding: utf-8 -*-


from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt
import pandas as pd

from .configs import GsParams, SmootherSpec
from .errors import InvalidInputError
from .gs_engine import (
    FitTrace,
    Objective,
    SearchDirection,
    combine_gradients,
    descend,
    resolve_sample_size,
    sample_gradients,
)
from .minnorm import GradientSet
from .smoothing import AdditiveFit, AdditiveProjector
from .utils.logging import get_logger
from .utils.misc import as_float_vector

_logger = get_logger(__name__)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        err_msg = f"`alpha` must lie in (0, 1), but got {alpha}."
        raise InvalidInputError(err_msg)


def pinball_loss(q: npt.ArrayLike, y: npt.ArrayLike, alpha: float) -> float:
    """``sum_i (1 - alpha) (y_i - q_i)^- + alpha (y_i - q_i)^+``."""
    _check_alpha(alpha)
    resid = as_float_vector(y, "y") - as_float_vector(q, "q")
    return float(np.sum(np.where(resid > 0.0, alpha * resid, (alpha - 1.0) * resid)))


def pinball_grad(q: npt.ArrayLike, y: npt.ArrayLike, alpha: float) -> np.ndarray:
    """Derivative in ``q``; ties ``y_i == q_i`` take the ``1 - alpha`` branch."""
    _check_alpha(alpha)
    resid = as_float_vector(y, "y") - as_float_vector(q, "q")
    return np.where(resid > 0.0, -alpha, 1.0 - alpha)


class PinballObjective(Objective):
    """Pinball risk as a function of the vector of fitted quantiles."""

    def __init__(self, y: np.ndarray, alpha: float) -> None:
        _check_alpha(alpha)
        self.y = y
        self.alpha = alpha

    @property
    def dim(self) -> int:
        return int(self.y.size)

    def eval(self, x: np.ndarray) -> float:
        return pinball_loss(x, self.y, self.alpha)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return pinball_grad(x, self.y, self.alpha)

    def eval_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        resid = self.y[None, :] - xs
        return np.where(resid > 0.0, self.alpha * resid, (self.alpha - 1.0) * resid).sum(axis=1)

    def grad_batch(self, xs: np.ndarray, n_workers: int = 1) -> np.ndarray:
        return np.where(self.y[None, :] - xs > 0.0, -self.alpha, 1.0 - self.alpha)


@dataclass
class QuantileModel:
    alpha: float
    q: np.ndarray
    projector: AdditiveProjector
    decomposition: AdditiveFit
    trace: FitTrace = field(default_factory=FitTrace)

    @property
    def converged(self) -> bool:
        return self.trace.converged

    @property
    def risk(self) -> float:
        return self.trace.final_objective


@dataclass(frozen=True)
class CoverageReport:
    overall: float
    by_group: dict[str, float] = field(default_factory=dict)


def fit_quantile_additive(
    y: npt.ArrayLike,
    covariates: npt.ArrayLike,
    alpha: float,
    specs: Sequence[SmootherSpec],
    gs: Optional[GsParams] = None,
    start: Optional[float] = None,
) -> QuantileModel:
    """
    Additive quantile regression by gradient sampling with a smoothed direction.

    Each iteration samples pinball gradients around the current fit, combines
    them (average by default, min-norm in ``qp`` mode), projects the result on
    the additive space and line-searches along the normalized projection.
    The additive decomposition of ``q`` is carried along every accepted step.
    The descent starts from the constant ``start``, by default the sample
    ``alpha``-quantile.
    """
    _check_alpha(alpha)
    yvec = as_float_vector(y, "y")
    if not np.all(np.isfinite(yvec)):
        err_msg = "Responses must be finite."
        raise InvalidInputError(err_msg)
    n, k = yvec.size, len(specs)
    if n < k + 2:
        err_msg = f"Need at least {k + 2} observations for {k} smoother(s), got {n}."
        raise InvalidInputError(err_msg)
    wmat = np.asarray(covariates, dtype=np.float64).reshape(n, -1)

    params = (gs if gs is not None else GsParams()).with_mode("average")
    projector = AdditiveProjector(wmat, specs)
    objective = PinballObjective(yvec, alpha)
    m = resolve_sample_size(params, n)

    if start is not None and not np.isfinite(start):
        err_msg = f"`start` must be finite, but got {start}."
        raise InvalidInputError(err_msg)
    q0 = float(start) if start is not None else float(np.quantile(yvec, alpha, method="inverted_cdf"))
    decomposition = AdditiveFit.constant(q0, projector)
    _logger.info("> Fitting the %.3g-quantile of %d observations with %d smoother(s), start q0=%.6g", alpha, n, k, q0)

    def _direction(q: np.ndarray, eps: float, rng: np.random.Generator) -> SearchDirection:
        sampled = sample_gradients(objective, q, eps, m, rng, n_workers=params.n_workers)
        gset = GradientSet(np.vstack([objective.grad(q)[None, :], sampled.gradients]))
        subgrad = combine_gradients(gset, params)
        smoothed = projector.project(subgrad.point)
        norm = float(np.linalg.norm(smoothed.fitted))
        step = -smoothed.fitted / norm if norm > 0.0 else np.zeros(n)
        return SearchDirection(step=step, slope=norm, g_norm=subgrad.norm, method=subgrad.method, payload=smoothed)

    def _accept(q: np.ndarray, t: float, direction: SearchDirection) -> None:
        nonlocal decomposition
        decomposition = decomposition.combine(direction.payload, -t / direction.slope)

    q, trace = descend(
        objective, np.full(n, q0), params, _direction, on_accept=_accept, label=f"quantile(alpha={alpha:g})"
    )
    return QuantileModel(alpha=alpha, q=q, projector=projector, decomposition=decomposition, trace=trace)


def predict_quantile(model: QuantileModel, covariates: npt.ArrayLike) -> np.ndarray:
    return model.decomposition.predict(covariates)


def empirical_coverage(
    y: npt.ArrayLike,
    q: npt.ArrayLike,
    groups: Optional[Sequence[object]] = None,
) -> CoverageReport:
    """Fraction of responses at or below the fitted quantile, overall and per group."""
    covered = pd.Series(as_float_vector(y, "y") <= as_float_vector(q, "q"), dtype=float)
    by_group: dict[str, float] = {}
    if groups is not None:
        if len(groups) != len(covered):
            err_msg = f"Got {len(groups)} group labels for {len(covered)} observations."
            raise InvalidInputError(err_msg)
        grouped = covered.groupby(pd.Series(list(groups), dtype=object).astype(str), sort=False).mean()
        by_group = {str(key): float(value) for key, value in grouped.items()}
    return CoverageReport(overall=float(covered.mean()), by_group=by_group)
