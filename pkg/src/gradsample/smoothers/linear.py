# -*- coding: utf-8 -*-


import warnings

import numpy as np

from gradsample.configs import LinearSpec
from gradsample.errors import DegenerateDesignWarning

from ._base_smoother import Smoother


class LinearSmoother(Smoother[LinearSpec]):
    """Least-squares projection onto ``{1, w}``."""

    def __init__(self, spec: LinearSpec, covariates: np.ndarray) -> None:
        super().__init__(spec, covariates)
        self.w = np.asarray(covariates[:, spec.covariate_index], dtype=np.float64)
        self.w_mean = float(self.w.mean())
        self.centered = self.w - self.w_mean
        self.sxx = float(self.centered @ self.centered)
        if self.sxx == 0.0:
            warn_msg = f"Covariate {spec.covariate_index} is constant; its linear smooth reduces to the mean."
            warnings.warn(warn_msg, DegenerateDesignWarning, stacklevel=2)

    @property
    def df(self) -> float:
        return 1.0 if self.sxx == 0.0 else 2.0

    def _coefficients(self, g: np.ndarray) -> tuple[float, float]:
        slope = 0.0 if self.sxx == 0.0 else float(self.centered @ g) / self.sxx
        return float(np.mean(g)), slope

    def smooth(self, g: np.ndarray) -> np.ndarray:
        level, slope = self._coefficients(g)
        return level + slope * self.centered

    def predict(self, g: np.ndarray, covariates: np.ndarray) -> np.ndarray:
        x_new = np.asarray(covariates[:, self.spec.covariate_index], dtype=np.float64)
        self._check_range(self.w, x_new)
        level, slope = self._coefficients(g)
        return level + slope * (x_new - self.w_mean)
