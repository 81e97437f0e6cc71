# -*- coding: utf-8 -*-


from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .configs import FunctionalSpec
from .gpd import Lambda, functional_map, jacobian_blocks
from .gs_engine import Objective
from .utils.misc import as_float_vector


@dataclass(frozen=True)
class GradCheckReport:
    max_error: float
    worst_index: int
    analytic: np.ndarray
    numeric: np.ndarray

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_error < tol


def mixed_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """``|a - b| / max(1, |b|)``: relative for large entries, absolute near zero."""
    return np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))


def _report(analytic: np.ndarray, numeric: np.ndarray) -> GradCheckReport:
    errors = mixed_error(analytic, numeric)
    worst = int(np.argmax(errors)) if errors.size else 0
    return GradCheckReport(
        max_error=float(errors.max()) if errors.size else 0.0,
        worst_index=worst,
        analytic=analytic,
        numeric=numeric,
    )


def gradcheck(objective: Objective, x: npt.ArrayLike, h: float = 1e-6) -> GradCheckReport:
    """Compare ``objective.grad`` with central differences of ``objective.eval`` at ``x``."""
    xvec = as_float_vector(x, "x")
    analytic = objective.grad(xvec)
    shifts = h * np.eye(xvec.size)
    upper = objective.eval_batch(xvec + shifts)
    lower = objective.eval_batch(xvec - shifts)
    return _report(analytic, (upper - lower) / (2.0 * h))


def jacobian_check(lam: Lambda, spec: FunctionalSpec, h: float = 1e-6) -> GradCheckReport:
    """Every Jacobian block entry against central differences of ``functional_map``."""
    blocks = jacobian_blocks(lam, spec)
    columns = []
    for shift_eta, shift_kappa in ((h, 0.0), (0.0, h)):
        up = functional_map(Lambda(lam.eta + shift_eta, lam.kappa + shift_kappa), spec)
        down = functional_map(Lambda(lam.eta - shift_eta, lam.kappa - shift_kappa), spec)
        columns.append([(u - d) / (2.0 * h) for u, d in zip(up, down)])
    numeric = np.concatenate([columns[0][0], columns[1][0], columns[0][1], columns[1][1]])
    analytic = np.concatenate([blocks.a, blocks.b, blocks.c, blocks.d])
    return _report(analytic, numeric)
