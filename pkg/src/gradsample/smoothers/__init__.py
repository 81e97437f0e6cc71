# -*- coding: utf-8 -*-


import numpy as np

from gradsample.configs import SmootherSpec
from gradsample.utils.msgspec import get_struct_tag

from ._base_smoother import Smoother
from .cell_factor import CellFactorSmoother, cell_codes, group_means
from .linear import LinearSmoother
from .local_linear import LocalLinearSmoother, bandwidth_for_df, local_linear_weights, rule_of_thumb_bandwidth

_SMOOTHER_REGISTRY: dict[str, type[Smoother]] = {  # type: ignore[type-arg]
    "local_linear": LocalLinearSmoother,
    "linear": LinearSmoother,
    "cell_factor": CellFactorSmoother,
}


def get_smoother_from_spec(spec: SmootherSpec, covariates: np.ndarray) -> Smoother:  # type: ignore[type-arg]
    """
    Factory function binding a smoother spec to the training covariates.
    """
    kind = get_struct_tag(spec)
    if kind is None:
        err_msg = f"Failed to guess the smoother kind from the spec: {spec!r}."
        raise ValueError(err_msg)
    if kind not in _SMOOTHER_REGISTRY:
        err_msg = f"Smoother '{kind}' is not supported."
        raise ValueError(err_msg)
    return _SMOOTHER_REGISTRY[kind](spec, covariates)


__all__ = [
    "CellFactorSmoother",
    "LinearSmoother",
    "LocalLinearSmoother",
    "Smoother",
    "bandwidth_for_df",
    "cell_codes",
    "get_smoother_from_spec",
    "group_means",
    "local_linear_weights",
    "rule_of_thumb_bandwidth",
]
