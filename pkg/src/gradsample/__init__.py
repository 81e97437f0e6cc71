# -*- coding: utf-8 -*-


from .configs import FunctionalSpec, GsParams, RunConfig
from .gs_engine import FitTrace, FunctionObjective, Objective, approx_subgradient, armijo_search, gsda_minimize
from .minnorm import GradientSet, MinNormResult, average_fallback, min_norm_point
from .pot_fit import PotModel, fit_pot_additive, return_levels
from .quantile_fit import QuantileModel, fit_quantile_additive, pinball_grad, pinball_loss, predict_quantile
from .smoothing import AdditiveFit, AdditiveProjector, additive_project

__all__ = [
    "AdditiveFit",
    "AdditiveProjector",
    "FitTrace",
    "FunctionObjective",
    "FunctionalSpec",
    "GradientSet",
    "GsParams",
    "MinNormResult",
    "Objective",
    "PotModel",
    "QuantileModel",
    "RunConfig",
    "additive_project",
    "approx_subgradient",
    "armijo_search",
    "average_fallback",
    "fit_pot_additive",
    "fit_quantile_additive",
    "gsda_minimize",
    "min_norm_point",
    "pinball_grad",
    "pinball_loss",
    "predict_quantile",
    "return_levels",
]
