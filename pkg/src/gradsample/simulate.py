# -*- coding: utf-8 -*-


from collections.abc import Callable, Sequence
from typing import Union

import numpy as np
import numpy.typing as npt

from .data import Dataset, make_dataset
from .errors import InvalidInputError
from .gpd import KAPPA_EPS
from .utils.logging import get_logger

_logger = get_logger(__name__)

ParamFn = Union[float, Callable[[np.ndarray], npt.ArrayLike]]

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
FIRST_HOUR = 7
# negative-binomial size; variance is mean + mean^2 / SALES_DISPERSION
SALES_DISPERSION = 200.0

# mean hourly counts, 07:00 to 23:00, Monday to Sunday
SALES_PATTERN = np.array(
    [
        [45, 70, 95, 110, 120, 165, 185, 150, 115, 105, 120, 160, 175, 140, 100, 70, 48],
        [42, 66, 92, 108, 118, 160, 180, 146, 112, 102, 118, 158, 170, 136, 96, 66, 45],
        [44, 68, 94, 112, 122, 168, 190, 152, 116, 108, 124, 165, 180, 142, 102, 72, 47],
        [46, 72, 98, 114, 126, 170, 192, 156, 120, 110, 128, 170, 186, 150, 108, 76, 50],
        [50, 78, 104, 120, 132, 178, 200, 166, 130, 122, 142, 188, 205, 172, 128, 92, 60],
        [40, 48, 70, 100, 135, 160, 175, 180, 170, 160, 155, 165, 170, 160, 140, 110, 80],
        [40, 40, 42, 50, 70, 95, 120, 135, 140, 138, 130, 118, 100, 85, 70, 55, 42],
    ],
    dtype=np.float64,
)


def gpd_inverse_cdf(u: npt.ArrayLike, sigma: npt.ArrayLike, kappa: npt.ArrayLike) -> np.ndarray:
    """``sigma * ((1 - u)^(-kappa) - 1) / kappa``, or ``-sigma * log(1 - u)`` at ``kappa = 0``."""
    uu, sig, kap = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (u, sigma, kappa)))
    log_tail = np.log1p(-uu)
    small = np.abs(kap) < KAPPA_EPS
    safe = np.where(small, 1.0, kap)
    regular = sig * np.expm1(-safe * log_tail) / safe
    return np.where(small, -sig * log_tail, regular)


def _evaluate(param: ParamFn, t: np.ndarray, name: str) -> np.ndarray:
    values = param(t) if callable(param) else param
    out = np.broadcast_to(np.asarray(values, dtype=np.float64), t.shape).copy()
    if not np.all(np.isfinite(out)):
        err_msg = f"`{name}` produced non-finite values."
        raise InvalidInputError(err_msg)
    return out


def simulate_gpd(
    n: int,
    sigma_fn: ParamFn,
    kappa_fn: ParamFn,
    seed: int = 0,
    site_effects: Sequence[float] = (),
) -> Dataset:
    """
    GPD excesses over a time index ``t`` in ``[0, 1]``.

    ``sigma_fn`` and ``kappa_fn`` are constants or functions of ``t``. With
    ``site_effects`` the rows cycle through sites ``s1, s2, ...`` whose scale
    is multiplied by the matching effect; a ``site`` factor column is added.
    """
    if n < 1:
        err_msg = f"`n` must be a positive integer, but got {n}."
        raise InvalidInputError(err_msg)
    t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    sigma = _evaluate(sigma_fn, t, "sigma_fn")
    kappa = _evaluate(kappa_fn, t, "kappa_fn")
    columns: dict[str, npt.ArrayLike] = {"t": t}
    factors: tuple[str, ...] = ()
    if site_effects:
        site_codes = np.arange(n) % len(site_effects)
        sigma = sigma * np.asarray(site_effects, dtype=np.float64)[site_codes]
        columns["site"] = [f"s{code + 1}" for code in site_codes]
        factors = ("site",)
    if np.any(sigma <= 0.0):
        err_msg = "Scales must be positive."
        raise InvalidInputError(err_msg)

    rng = np.random.default_rng(seed)
    y = gpd_inverse_cdf(rng.random(n), sigma, kappa)
    _logger.info("> Simulated %d GPD excesses (seed=%d)", n, seed)
    return make_dataset({"y": y, **columns}, response="y", factors=factors)


def sales_pattern(hours_per_day: int) -> np.ndarray:
    """The embedded day-by-hour mean table, resampled to ``hours_per_day`` columns."""
    n_hours = SALES_PATTERN.shape[1]
    if hours_per_day == n_hours:
        return SALES_PATTERN.copy()
    grid = np.linspace(0.0, n_hours - 1.0, hours_per_day)
    return np.vstack([np.interp(grid, np.arange(n_hours), row) for row in SALES_PATTERN])


def simulate_sales(days: int, hours_per_day: int = 17, seed: int = 0) -> Dataset:
    """
    Hourly counts over ``days`` consecutive days starting on a Monday.

    Counts are negative binomial around the day-by-hour pattern table, with
    ``day`` and ``hour`` factor columns.
    """
    if days < 7 or hours_per_day < 2:
        err_msg = f"Need days >= 7 and hours_per_day >= 2, got days={days}, hours_per_day={hours_per_day}."
        raise InvalidInputError(err_msg)
    pattern = sales_pattern(hours_per_day)
    day_index = np.repeat(np.arange(days), hours_per_day)
    hour_index = np.tile(np.arange(hours_per_day), days)
    means = pattern[day_index % 7, hour_index]

    rng = np.random.default_rng(seed)
    counts = rng.negative_binomial(SALES_DISPERSION, SALES_DISPERSION / (SALES_DISPERSION + means))
    _logger.info("> Simulated %d days x %d hours of sales (seed=%d)", days, hours_per_day, seed)
    return make_dataset(
        {
            "y": counts.astype(np.float64),
            "day": [WEEKDAYS[d % 7] for d in day_index],
            "hour": [str(FIRST_HOUR + h) for h in hour_index],
        },
        response="y",
        factors=("day", "hour"),
    )
