# -*- coding: utf-8 -*-


from collections.abc import Callable

import numpy as np

from .gs_engine import FunctionObjective, Objective


def nonsmooth_rosenbrock(x: np.ndarray) -> float:
    """``10 |x2 - x1^2| + (1 - x1)^2``, kinked along the parabola ``x2 = x1^2``."""
    return float(10.0 * abs(x[1] - x[0] ** 2) + (1.0 - x[0]) ** 2)


def nonsmooth_rosenbrock_grad(x: np.ndarray) -> np.ndarray:
    sign = np.sign(x[1] - x[0] ** 2)
    return np.array([-20.0 * x[0] * sign - 2.0 * (1.0 - x[0]), 10.0 * sign])


def _make_nsrosenbrock(dim: int) -> Objective:
    if dim != 2:
        err_msg = f"nsrosenbrock is defined in dimension 2, got {dim}."
        raise ValueError(err_msg)
    return FunctionObjective(nonsmooth_rosenbrock, nonsmooth_rosenbrock_grad, 2, name="nsrosenbrock")


def _make_quadratic(dim: int) -> Objective:
    return FunctionObjective(lambda x: float(x @ x), lambda x: 2.0 * x, dim, name="quadratic")


def _make_l1(dim: int) -> Objective:
    return FunctionObjective(lambda x: float(np.abs(x).sum()), np.sign, dim, name="l1")


_OBJECTIVE_REGISTRY: dict[str, tuple[Callable[[int], Objective], int]] = {
    "nsrosenbrock": (_make_nsrosenbrock, 2),
    "quadratic": (_make_quadratic, 2),
    "l1": (_make_l1, 2),
}

# known minimizers, reported as distance-to-optimum in diagnostics
_KNOWN_MINIMIZERS: dict[str, Callable[[int], np.ndarray]] = {
    "nsrosenbrock": lambda dim: np.ones(dim),
    "quadratic": np.zeros,
    "l1": np.zeros,
}


def list_objectives() -> list[str]:
    return sorted(_OBJECTIVE_REGISTRY)


def get_objective(name: str, dim: int | None = None) -> Objective:
    """Factory for the built-in test objectives; ``dim`` defaults per objective."""
    key = name.lower()
    if key not in _OBJECTIVE_REGISTRY:
        err_msg = f"Objective '{name}' is not supported, choose one of {list_objectives()}."
        raise ValueError(err_msg)
    factory, default_dim = _OBJECTIVE_REGISTRY[key]
    return factory(default_dim if dim is None else dim)


def known_minimizer(name: str, dim: int) -> np.ndarray | None:
    factory = _KNOWN_MINIMIZERS.get(name.lower())
    return None if factory is None else factory(dim)


_DEFAULT_STARTS: dict[str, Callable[[int], np.ndarray]] = {
    "nsrosenbrock": lambda dim: np.array([-1.0, 1.0]),
    "quadratic": lambda dim: np.ones(dim),
    "l1": lambda dim: np.arange(3.0, 3.0 + dim),
}


def default_start(name: str, dim: int) -> np.ndarray:
    return _DEFAULT_STARTS[name.lower()](dim)
