# -*- coding: utf-8 -*-


from .functionals import FunctionalSpec
from .gs import GsParams
from .run import RunConfig, load_run_config, parse_smoother_option
from .smoothers import CellFactorSpec, LinearSpec, LocalLinearSpec, SmootherSpec

__all__ = [
    "CellFactorSpec",
    "FunctionalSpec",
    "GsParams",
    "LinearSpec",
    "LocalLinearSpec",
    "RunConfig",
    "SmootherSpec",
    "load_run_config",
    "parse_smoother_option",
]
