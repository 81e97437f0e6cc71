# -*- coding: utf-8 -*-


import warnings
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import pandas as pd

from .configs import LocalLinearSpec, SmootherSpec
from .errors import InvalidInputError, NonConvergenceWarning
from .smoothers import LocalLinearSmoother, Smoother, get_smoother_from_spec, group_means
from .utils.logging import get_logger
from .utils.misc import as_float_vector

_logger = get_logger(__name__)

BACKFIT_TOL = 1e-8
BACKFIT_MAX_CYCLES = 100


def _single_column(w: npt.ArrayLike) -> np.ndarray:
    wvec = as_float_vector(w, "w")
    if wvec.size < 2:
        err_msg = f"Smoothing needs at least 2 observations, got {wvec.size}."
        raise InvalidInputError(err_msg)
    if not np.all(np.isfinite(wvec)):
        err_msg = "Covariate values must be finite."
        raise InvalidInputError(err_msg)
    return wvec[:, None]


def local_linear_smooth(w: npt.ArrayLike, g: npt.ArrayLike, bandwidth: float) -> np.ndarray:
    """Gaussian-kernel local-linear fit of ``g`` on ``w``, evaluated at every ``w_i``."""
    smoother = LocalLinearSmoother(LocalLinearSpec(0, bandwidth=bandwidth), _single_column(w))
    return smoother.smooth(as_float_vector(g, "g"))


def effective_df(w: npt.ArrayLike, bandwidth: float) -> float:
    return LocalLinearSmoother(LocalLinearSpec(0, bandwidth=bandwidth), _single_column(w)).df


def cell_factor_smooth(levels: Sequence[object], g: npt.ArrayLike) -> np.ndarray:
    """Replace each entry of ``g`` by the mean of ``g`` over its factor level."""
    gvec = as_float_vector(g, "g")
    if len(levels) != gvec.size:
        err_msg = f"Got {len(levels)} labels for {gvec.size} responses."
        raise InvalidInputError(err_msg)
    codes, uniques = pd.factorize(pd.Series(list(levels), dtype=object), sort=False)
    if (codes < 0).any():
        err_msg = "Factor labels must not be missing."
        raise InvalidInputError(err_msg)
    return group_means(codes, gvec, len(uniques))[codes]


@dataclass
class AdditiveFit:
    """
    ``intercept + sum_j components[:, j]`` with every component centered.

    ``residuals[:, j]`` is the partial residual the j-th smoother saw in the
    last sweep and ``offsets[j]`` the mean removed from its smooth, so that
    ``components[:, j] == smoother_j(residuals[:, j]) - offsets[j]``. This is
    what lets the fit be evaluated at new covariates, and since every piece is
    linear, fits can be combined with ``combine``.
    """

    intercept: float
    components: np.ndarray
    residuals: np.ndarray
    offsets: np.ndarray
    projector: "AdditiveProjector"
    converged: bool = True
    n_cycles: int = 0

    @property
    def fitted(self) -> np.ndarray:
        return self.intercept + self.components.sum(axis=1)

    @property
    def k(self) -> int:
        return int(self.components.shape[1])

    @classmethod
    def constant(cls, value: float, projector: "AdditiveProjector") -> "AdditiveFit":
        n, k = projector.n, projector.k
        return cls(
            intercept=float(value),
            components=np.zeros((n, k)),
            residuals=np.zeros((n, k)),
            offsets=np.zeros(k),
            projector=projector,
        )

    def scaled(self, factor: float) -> "AdditiveFit":
        return AdditiveFit(
            intercept=self.intercept * factor,
            components=self.components * factor,
            residuals=self.residuals * factor,
            offsets=self.offsets * factor,
            projector=self.projector,
            converged=self.converged,
            n_cycles=self.n_cycles,
        )

    def combine(self, other: "AdditiveFit", weight: float = 1.0) -> "AdditiveFit":
        """The fit of ``self + weight * other`` (both must share a projector)."""
        if other.projector is not self.projector:
            err_msg = "Only fits produced by the same projector can be combined."
            raise InvalidInputError(err_msg)
        return AdditiveFit(
            intercept=self.intercept + weight * other.intercept,
            components=self.components + weight * other.components,
            residuals=self.residuals + weight * other.residuals,
            offsets=self.offsets + weight * other.offsets,
            projector=self.projector,
            converged=self.converged and other.converged,
            n_cycles=max(self.n_cycles, other.n_cycles),
        )

    def component_means(self) -> np.ndarray:
        return self.components.mean(axis=0) if self.k else np.zeros(0)

    def predict_components(self, covariates: npt.ArrayLike) -> np.ndarray:
        if self.k == 0:
            # intercept-only fits ignore the covariate layout
            return np.zeros((len(np.atleast_1d(np.asarray(covariates))), 0))
        new = self.projector.check_covariates(covariates)
        columns = [
            smoother.predict(self.residuals[:, j], new) - self.offsets[j]
            for j, smoother in enumerate(self.projector.smoothers)
        ]
        if not columns:
            return np.zeros((new.shape[0], 0))
        return np.column_stack(columns)

    def predict(self, covariates: npt.ArrayLike) -> np.ndarray:
        components = self.predict_components(covariates)
        return self.intercept + components.sum(axis=1)


class AdditiveProjector(object):
    """
    Backfitting projection onto ``intercept + sum_j f_j(w_j)``.

    One smoother per spec is bound to the training covariates at construction,
    so hat matrices and bandwidth searches are paid once per fit.
    """

    def __init__(self, covariates: npt.ArrayLike, specs: Sequence[SmootherSpec]) -> None:
        wmat = np.asarray(covariates, dtype=np.float64)
        if wmat.ndim == 1:
            wmat = wmat[:, None]
        if wmat.ndim != 2:
            err_msg = f"Covariates must form an (n, k) matrix, got shape {wmat.shape}."
            raise InvalidInputError(err_msg)
        if not np.all(np.isfinite(wmat)):
            err_msg = "Covariates must be finite."
            raise InvalidInputError(err_msg)

        used = Counter(idx for spec in specs for idx in Smoother.column_indices(spec))
        repeated = sorted(idx for idx, count in used.items() if count > 1)
        if repeated:
            err_msg = f"Covariate column(s) {repeated} are claimed by more than one smoother."
            raise InvalidInputError(err_msg)
        if wmat.shape[0] < len(specs) + 1:
            err_msg = f"Need at least {len(specs) + 1} observations for {len(specs)} smoothers, got {wmat.shape[0]}."
            raise InvalidInputError(err_msg)

        self.covariates = wmat
        self.specs = list(specs)
        self.smoothers: list[Smoother] = [get_smoother_from_spec(spec, wmat) for spec in self.specs]  # type: ignore[type-arg]
        for smoother in self.smoothers:
            _logger.debug("> %r with effective df %.3f", smoother, smoother.df)

    @property
    def n(self) -> int:
        return int(self.covariates.shape[0])

    @property
    def k(self) -> int:
        return len(self.smoothers)

    def check_covariates(self, covariates: npt.ArrayLike) -> np.ndarray:
        new = np.asarray(covariates, dtype=np.float64)
        if new.ndim == 1:
            new = new[:, None] if self.covariates.shape[1] == 1 else new[None, :]
        if new.ndim != 2 or new.shape[1] != self.covariates.shape[1]:
            err_msg = f"Expected covariates with {self.covariates.shape[1]} column(s), got shape {new.shape}."
            raise InvalidInputError(err_msg)
        return new

    def project(self, g: npt.ArrayLike) -> AdditiveFit:
        gvec = as_float_vector(g, "g")
        if gvec.size != self.n:
            err_msg = f"Working vector has length {gvec.size}, expected {self.n}."
            raise InvalidInputError(err_msg)
        intercept = float(gvec.mean())
        components = np.zeros((self.n, self.k))
        residuals = np.zeros((self.n, self.k))
        offsets = np.zeros(self.k)
        if self.k == 0:
            return AdditiveFit(intercept, components, residuals, offsets, self)

        tol = BACKFIT_TOL * max(1.0, float(np.abs(gvec).max()))
        centered = gvec - intercept
        converged = False
        n_cycles = 0
        for n_cycles in range(1, BACKFIT_MAX_CYCLES + 1):
            max_change = 0.0
            for j, smoother in enumerate(self.smoothers):
                partial = centered - components.sum(axis=1) + components[:, j]
                smooth = smoother.smooth(partial)
                offset = float(smooth.mean())
                updated = smooth - offset
                max_change = max(max_change, float(np.abs(updated - components[:, j]).max()))
                components[:, j] = updated
                residuals[:, j] = partial
                offsets[j] = offset
            if max_change < tol:
                converged = True
                break

        if not converged:
            warn_msg = f"Backfitting did not converge within {BACKFIT_MAX_CYCLES} cycles."
            _logger.warning("> %s", warn_msg)
            warnings.warn(warn_msg, NonConvergenceWarning, stacklevel=2)
        else:
            _logger.debug("> Backfitting converged after %d cycle(s)", n_cycles)
        return AdditiveFit(intercept, components, residuals, offsets, self, converged=converged, n_cycles=n_cycles)


def additive_project(g: npt.ArrayLike, covariates: npt.ArrayLike, specs: Sequence[SmootherSpec]) -> AdditiveFit:
    """One-shot backfitting projection; build an ``AdditiveProjector`` to reuse smoothers."""
    return AdditiveProjector(covariates, specs).project(g)


__all__ = [
    "AdditiveFit",
    "AdditiveProjector",
    "additive_project",
    "cell_factor_smooth",
    "effective_df",
    "local_linear_smooth",
]
