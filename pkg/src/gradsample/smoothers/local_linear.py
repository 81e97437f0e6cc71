# -*- coding: utf-8 -*-


import math
import warnings
from typing import Optional

import numpy as np
from scipy import optimize

from gradsample.configs import LocalLinearSpec
from gradsample.errors import DegenerateDesignWarning, InvalidInputError
from gradsample.utils.logging import get_logger

from ._base_smoother import Smoother

_logger = get_logger(__name__)

# relative size of S0*S2 - S1^2 below which the local fit falls back to kernel averaging
_DET_RTOL = 1e-10


def rule_of_thumb_bandwidth(w: np.ndarray) -> float:
    """Silverman-style default ``1.06 * sd(w) * n^(-1/5)``."""
    sd = float(np.std(w, ddof=1)) if w.size > 1 else 0.0
    if sd == 0.0:
        return 1.0
    return 1.06 * sd * w.size ** (-0.2)


def local_linear_weights(w: np.ndarray, x_eval: np.ndarray, bandwidth: float) -> np.ndarray:
    """
    Equivalent-kernel weights of the Gaussian local-linear fit, shape ``(len(x_eval), len(w))``.

    Row ``r`` holds the weights ``l_i(x_r)`` with ``fit(x_r) = sum_i l_i(x_r) g_i``.
    """
    diff = w[None, :] - x_eval[:, None]
    u2 = (diff / bandwidth) ** 2
    # kernels are rescaled per row; the weights are invariant to that
    kernel = np.exp(-0.5 * (u2 - u2.min(axis=1, keepdims=True)))
    s0 = kernel.sum(axis=1)
    s1 = (kernel * diff).sum(axis=1)
    s2 = (kernel * diff**2).sum(axis=1)
    det = s0 * s2 - s1**2

    weights = kernel / s0[:, None]
    regular = det > _DET_RTOL * s0 * s2
    if regular.any():
        kr, dr = kernel[regular], diff[regular]
        weights[regular] = kr * (s2[regular, None] - dr * s1[regular, None]) / det[regular, None]
    return weights


class LocalLinearSmoother(Smoother[LocalLinearSpec]):
    def __init__(self, spec: LocalLinearSpec, covariates: np.ndarray) -> None:
        super().__init__(spec, covariates)
        self.w = np.asarray(covariates[:, spec.covariate_index], dtype=np.float64)
        if not np.all(np.isfinite(self.w)):
            err_msg = f"Covariate {spec.covariate_index} holds non-finite values."
            raise InvalidInputError(err_msg)
        self.degenerate = bool(np.ptp(self.w) == 0.0)
        if self.degenerate:
            warn_msg = f"Covariate {spec.covariate_index} is constant; its local-linear smooth reduces to the mean."
            warnings.warn(warn_msg, DegenerateDesignWarning, stacklevel=2)
            self.bandwidth = math.inf
            self.hat = np.full((self.n, self.n), 1.0 / self.n)
            return

        if spec.bandwidth is not None:
            self.bandwidth = spec.bandwidth
        elif spec.target_df is not None:
            self.bandwidth = bandwidth_for_df(self.w, spec.target_df)
        else:
            self.bandwidth = rule_of_thumb_bandwidth(self.w)
        self.hat = local_linear_weights(self.w, self.w, self.bandwidth)

    @property
    def df(self) -> float:
        return float(np.trace(self.hat))

    def smooth(self, g: np.ndarray) -> np.ndarray:
        return self.hat @ g

    def predict(self, g: np.ndarray, covariates: np.ndarray) -> np.ndarray:
        x_new = np.asarray(covariates[:, self.spec.covariate_index], dtype=np.float64)
        if self.degenerate:
            return np.full(x_new.shape, float(np.mean(g)))
        self._check_range(self.w, x_new)
        return local_linear_weights(self.w, x_new, self.bandwidth) @ g


def _df_at(w: np.ndarray, bandwidth: float) -> float:
    weights = local_linear_weights(w, w, bandwidth)
    return float(np.trace(weights))


def bandwidth_for_df(w: np.ndarray, target_df: float, xtol: Optional[float] = None) -> float:
    """
    Bandwidth whose local-linear smoother has effective df ``target_df``.

    Root-finds on the log bandwidth between a near-interpolating and a
    near-affine smoother.
    """
    spacing = np.diff(np.unique(w))
    if spacing.size == 0:
        err_msg = "Cannot target an effective df on a constant covariate."
        raise InvalidInputError(err_msg)
    log_lo = math.log(float(spacing.min()) * 1e-2)
    log_hi = math.log(float(np.ptp(w)) * 1e3)
    df_lo, df_hi = _df_at(w, math.exp(log_lo)), _df_at(w, math.exp(log_hi))
    if not df_hi < target_df < df_lo:
        err_msg = f"Target df {target_df} is outside the attainable range ({df_hi:.4g}, {df_lo:.4g})."
        raise InvalidInputError(err_msg)

    log_bw = optimize.brentq(
        lambda log_h: _df_at(w, math.exp(log_h)) - target_df,
        log_lo,
        log_hi,
        xtol=xtol if xtol is not None else 1e-10,
    )
    bandwidth = math.exp(log_bw)
    _logger.debug("> Bandwidth %.6g gives df %.4f (target %.4f)", bandwidth, _df_at(w, bandwidth), target_df)
    return bandwidth
