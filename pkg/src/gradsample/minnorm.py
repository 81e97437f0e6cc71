# -*- coding: utf-8 -*-


from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
import numpy.typing as npt

from .errors import InvalidInputError, NumericalFailureError
from .utils.logging import get_logger

_logger = get_logger(__name__)

MinNormMethod = Literal["qp", "average"]

# weights below this are dropped from the active set
_WEIGHT_FLOOR = 1e-14


@dataclass(frozen=True)
class GradientSet:
    """
    The gradient at an iterate stacked with the gradients sampled around it.

    ``vectors`` has shape ``(m + 1, n)``; row 0 is conventionally the gradient at
    the iterate itself.
    """

    vectors: np.ndarray

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] == 0:
            err_msg = f"A gradient set needs at least one vector, got array of shape {self.vectors.shape}."
            raise InvalidInputError(err_msg)
        if not np.all(np.isfinite(self.vectors)):
            bad_rows = np.flatnonzero(~np.all(np.isfinite(self.vectors), axis=1))
            err_msg = f"Gradient set holds non-finite entries in rows {bad_rows.tolist()}."
            raise InvalidInputError(err_msg)

    @classmethod
    def from_vectors(cls, vectors: Union[Sequence[npt.ArrayLike], np.ndarray]) -> "GradientSet":
        if len(vectors) == 0:
            err_msg = "A gradient set needs at least one vector, got none."
            raise InvalidInputError(err_msg)
        rows = [np.atleast_1d(np.asarray(vec, dtype=np.float64)) for vec in vectors]
        dims = {row.shape for row in rows}
        if len(dims) != 1 or rows[0].ndim != 1:
            err_msg = f"All gradient vectors must share one dimension, got shapes {sorted(dims)}."
            raise InvalidInputError(err_msg)
        return cls(np.vstack(rows))

    @property
    def n(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def m_plus_1(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class MinNormResult:
    point: np.ndarray
    weights: np.ndarray
    norm: float
    method: MinNormMethod
    n_iter: int = 0


def _as_gradient_set(gset: Union[GradientSet, Sequence[npt.ArrayLike], np.ndarray]) -> GradientSet:
    if isinstance(gset, GradientSet):
        return gset
    return GradientSet.from_vectors(gset)


def _affine_minimizer(points: np.ndarray) -> np.ndarray:
    """Barycentric coefficients of the min-norm point of the affine hull of ``points``."""
    k = points.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = points @ points.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    coef = solution[:k]
    return coef / coef.sum()


def min_norm_point(
    gset: Union[GradientSet, Sequence[npt.ArrayLike], np.ndarray],
    tol: float = 1e-10,
) -> MinNormResult:
    """
    Minimum-norm element of the convex hull of a gradient set.

    Wolfe's min-norm-point method: a major cycle adds the vertex that most
    violates optimality, minor cycles step back towards the current corral
    until the affine minimizer lies in its relative interior. Stops once the
    KKT residual ``x·x - min_j x·P_j`` is below ``tol`` times the largest
    squared vector norm.

    Raises:
        InvalidInputError: empty set or non-finite entries.
        NumericalFailureError: iteration cap ``100 * (m + 1)`` exceeded.
    """
    if tol <= 0.0:
        err_msg = f"`tol` must be positive, but got {tol}."
        raise InvalidInputError(err_msg)
    gset = _as_gradient_set(gset)
    points = gset.vectors
    n_points = gset.m_plus_1

    sq_norms = np.einsum("ij,ij->i", points, points)
    scale = max(float(sq_norms.max()), np.finfo(np.float64).tiny)
    start = int(np.argmin(sq_norms))

    active = [start]
    weights = np.zeros(n_points)
    weights[start] = 1.0
    x = points[start].copy()

    max_iter = 100 * n_points
    n_iter = 0
    prev_norm_sq = np.inf
    while True:
        n_iter += 1
        if n_iter > max_iter:
            err_msg = f"Min-norm-point iteration did not converge within {max_iter} steps."
            raise NumericalFailureError(err_msg)

        products = points @ x
        j = int(np.argmin(products))
        norm_sq = float(x @ x)
        if norm_sq - float(products[j]) <= tol * scale or j in active:
            break
        if n_iter > 1 and norm_sq >= prev_norm_sq:
            # rounding stalled the corral; x is optimal to working precision
            break
        prev_norm_sq = norm_sq
        active.append(j)

        # minor cycles
        while True:
            n_iter += 1
            if n_iter > max_iter:
                err_msg = f"Min-norm-point iteration did not converge within {max_iter} steps."
                raise NumericalFailureError(err_msg)
            idx = np.asarray(active)
            coef = _affine_minimizer(points[idx])
            if not np.all(np.isfinite(coef)):
                err_msg = "Min-norm-point affine sub-problem produced non-finite coefficients."
                raise NumericalFailureError(err_msg)
            if np.all(coef > _WEIGHT_FLOOR):
                weights[:] = 0.0
                weights[idx] = coef
                break

            current = weights[idx]
            blocking = coef <= _WEIGHT_FLOOR
            gaps = current[blocking] - coef[blocking]
            ratios = np.divide(current[blocking], gaps, out=np.zeros_like(gaps), where=gaps > 0.0)
            theta = float(np.clip(ratios.min(), 0.0, 1.0))
            mixed = (1.0 - theta) * current + theta * coef
            weights[:] = 0.0
            weights[idx] = mixed
            active = [int(i) for i in idx[mixed > _WEIGHT_FLOOR]]
            if not active:
                err_msg = "Min-norm-point active set collapsed."
                raise NumericalFailureError(err_msg)
            weights[weights <= _WEIGHT_FLOOR] = 0.0
            weights /= weights.sum()
            x = weights @ points
        x = weights @ points

    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    point = weights @ points
    return MinNormResult(point=point, weights=weights, norm=float(np.linalg.norm(point)), method="qp", n_iter=n_iter)


def average_fallback(gset: Union[GradientSet, Sequence[npt.ArrayLike], np.ndarray]) -> MinNormResult:
    """Arithmetic mean of the gradient set, a feasible point of the min-norm problem."""
    gset = _as_gradient_set(gset)
    weights = np.full(gset.m_plus_1, 1.0 / gset.m_plus_1)
    point = gset.vectors.mean(axis=0)
    return MinNormResult(point=point, weights=weights, norm=float(np.linalg.norm(point)), method="average")


def min_norm_or_average(gset: GradientSet, tol: float = 1e-10) -> MinNormResult:
    try:
        return min_norm_point(gset, tol=tol)
    except NumericalFailureError as e:
        _logger.debug("> Min-norm sub-problem failed (%s), using the average of the gradient set", e)
        return average_fallback(gset)
