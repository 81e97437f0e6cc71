# -*- coding: utf-8 -*-

"""
Generalized Pareto log-likelihood and the tail functionals that carry the
additive structure of peaks-over-threshold models.

Parameters are ``eta = log(sigma)`` and the shape ``kappa``. All functions
broadcast over arrays, so a batch of parameter vectors of shape ``(k, n)``
against ``n`` excesses is evaluated in one call. Shapes with
``|kappa| < KAPPA_EPS`` use series expansions in ``kappa``.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .configs import FunctionalSpec
from .errors import FunctionalUndefinedError, InfeasiblePointError, InvalidInputError, SingularBlockError
from .utils.misc import as_float_vector

KAPPA_EPS = 1e-8
DET_EPS = 1e-12


@dataclass(frozen=True)
class Lambda:
    eta: np.ndarray
    kappa: np.ndarray

    def __post_init__(self) -> None:
        if self.eta.shape != self.kappa.shape:
            err_msg = f"`eta` and `kappa` must share a shape, got {self.eta.shape} and {self.kappa.shape}."
            raise InvalidInputError(err_msg)

    @property
    def sigma(self) -> np.ndarray:
        return np.exp(self.eta)

    @property
    def n(self) -> int:
        return int(self.eta.shape[-1])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.eta, self.kappa], axis=-1)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "Lambda":
        n = vec.shape[-1] // 2
        return cls(eta=vec[..., :n], kappa=vec[..., n:])

    @classmethod
    def from_sigma(cls, sigma: npt.ArrayLike, kappa: npt.ArrayLike) -> "Lambda":
        sig, kap = np.broadcast_arrays(np.asarray(sigma, dtype=np.float64), np.asarray(kappa, dtype=np.float64))
        return cls(eta=np.log(sig), kappa=kap.copy())

    def is_feasible(self, y: np.ndarray) -> bool:
        return bool(np.all(1.0 + self.kappa * y / self.sigma > 0.0))


def _small(kappa: np.ndarray) -> np.ndarray:
    return np.abs(kappa) < KAPPA_EPS


def _safe_kappa(kappa: np.ndarray) -> np.ndarray:
    # placeholder value on the series branch keeps the regular branch finite
    return np.where(_small(kappa), 1.0, kappa)


def _series_entries(small: np.ndarray, *arrays: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Broadcast mask of the near-exponential entries and the matching values of ``arrays``."""
    shape = np.broadcast_shapes(np.shape(small), *(np.shape(a) for a in arrays))
    mask = np.broadcast_to(small, shape)
    return mask, [np.broadcast_to(a, shape)[mask] for a in arrays]


def gpd_loglik_terms(eta: np.ndarray, kappa: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-observation log-density, ``-inf`` outside the support."""
    # trial points far outside the support overflow; those entries end up -inf or rejected
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        z = y * np.exp(-eta)
        support = 1.0 + kappa * z > 0.0
        small = _small(kappa)
        kap = _safe_kappa(kappa)
        terms = np.asarray(-eta - (1.0 + 1.0 / kap) * np.log1p(kap * z), dtype=np.float64)
        if np.any(small):
            mask, (z_s, eta_s, kappa_s) = _series_entries(small, z, eta, kappa)
            terms[mask] = -eta_s - z_s - kappa_s * (z_s - 0.5 * z_s * z_s)
    return np.where(support, terms, -np.inf)


def gpd_loglik(lam: Lambda, y: npt.ArrayLike) -> float:
    """Total log-likelihood of the excesses ``y``; ``-inf`` if any lies outside the support."""
    yvec = as_float_vector(y, "y")
    if np.any(yvec <= 0.0):
        err_msg = "Excesses must be positive."
        raise InvalidInputError(err_msg)
    return float(np.sum(gpd_loglik_terms(lam.eta, lam.kappa, yvec)))


def gpd_loglik_grad_terms(eta: np.ndarray, kappa: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        z = y * np.exp(-eta)
        d_eta = -1.0 + (1.0 + kappa) * z / (1.0 + kappa * z)
        small = _small(kappa)
        kap = _safe_kappa(kappa)
        kz = kap * z
        d_kappa = np.asarray(np.log1p(kz) / kap**2 - (1.0 + 1.0 / kap) * z / (1.0 + kz), dtype=np.float64)
        if np.any(small):
            mask, (z_s, kappa_s) = _series_entries(small, z, kappa)
            z2 = z_s * z_s
            d_kappa[mask] = 0.5 * z2 - z_s + kappa_s * (z2 - 2.0 * z2 * z_s / 3.0)
    return d_eta, d_kappa


def gpd_loglik_grad(lam: Lambda, y: npt.ArrayLike) -> np.ndarray:
    """``(dl/deta, dl/dkappa)`` stacked into one vector of length ``2n``."""
    yvec = as_float_vector(y, "y")
    terms = gpd_loglik_terms(lam.eta, lam.kappa, yvec)
    if not np.all(np.isfinite(terms)):
        bad = np.flatnonzero(~np.isfinite(terms))
        err_msg = f"Log-likelihood gradient requested outside the GPD support at observation(s) {bad[:10].tolist()}."
        raise InfeasiblePointError(err_msg)
    d_eta, d_kappa = gpd_loglik_grad_terms(lam.eta, lam.kappa, yvec)
    return np.concatenate([d_eta, d_kappa])


def return_level(eta: np.ndarray, kappa: np.ndarray, scale: float) -> np.ndarray:
    """``sigma * (c^(-kappa) - 1) / kappa``, the excess level exceeded with scaled probability ``c``."""
    log_c = -np.log(scale)
    sigma = np.exp(eta)
    kap = _safe_kappa(kappa)
    regular = sigma * np.expm1(kap * log_c) / kap
    series = sigma * (log_c + 0.5 * kappa * log_c**2)
    return np.where(_small(kappa), series, regular)


def _return_level_dkappa(eta: np.ndarray, kappa: np.ndarray, scale: float) -> np.ndarray:
    log_c = -np.log(scale)
    sigma = np.exp(eta)
    kap = _safe_kappa(kappa)
    kl = kap * log_c
    regular = sigma * (kl * np.exp(kl) - np.expm1(kl)) / kap**2
    series = sigma * (0.5 * log_c**2 + kappa * log_c**3 / 3.0)
    return np.where(_small(kappa), series, regular)


def _check_es_defined(kappa: np.ndarray) -> None:
    if np.any(kappa >= 1.0):
        bad = np.flatnonzero(np.ravel(kappa) >= 1.0)
        err_msg = f"Expected shortfall needs kappa < 1, violated at observation(s) {bad[:10].tolist()}."
        raise FunctionalUndefinedError(err_msg)


def functional_map(lam: Lambda, spec: FunctionalSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    The pair of tail functionals selected by ``spec``.

    ``var_es`` gives the return level and the expected shortfall
    ``(theta + sigma) / (1 - kappa)``; ``var_var`` gives return levels at two
    scale factors.
    """
    scales = spec.scale_factors
    theta = return_level(lam.eta, lam.kappa, scales[0])
    if spec.pair == "var_var":
        return theta, return_level(lam.eta, lam.kappa, scales[1])
    _check_es_defined(lam.kappa)
    return theta, (theta + lam.sigma) / (1.0 - lam.kappa)


@dataclass(frozen=True)
class JacobianBlocks:
    """
    Per-observation derivatives ``[[a, b], [c, d]]`` of the two functionals
    (rows) with respect to ``(eta, kappa)`` (columns).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def det(self) -> np.ndarray:
        return self.a * self.d - self.b * self.c

    def matrices(self) -> np.ndarray:
        return np.stack([np.stack([self.a, self.b], axis=-1), np.stack([self.c, self.d], axis=-1)], axis=-2)

    def inverse_matrices(self) -> np.ndarray:
        det = self.det
        return np.stack(
            [np.stack([self.d, -self.b], axis=-1), np.stack([-self.c, self.a], axis=-1)],
            axis=-2,
        ) / det[..., None, None]

    def singular_indices(self) -> np.ndarray:
        return np.flatnonzero(~(np.abs(np.ravel(self.det)) > DET_EPS))

    def theta_gradient(self, g_eta: np.ndarray, g_kappa: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Chain rule ``J^-T grad_Lambda`` mapping a Lambda-gradient to the functionals."""
        det = self.det
        return (self.d * g_eta - self.c * g_kappa) / det, (self.a * g_kappa - self.b * g_eta) / det

    def lambda_step(self, d_first: np.ndarray, d_second: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """First-order preimage ``J^-1 d`` of a displacement of the functionals."""
        det = self.det
        return (self.d * d_first - self.b * d_second) / det, (self.a * d_second - self.c * d_first) / det


def jacobian_entries(eta: np.ndarray, kappa: np.ndarray, spec: FunctionalSpec) -> JacobianBlocks:
    """Analytic blocks without the invertibility check; broadcasts over batches."""
    scales = spec.scale_factors
    theta = return_level(eta, kappa, scales[0])
    dtheta_dk = _return_level_dkappa(eta, kappa, scales[0])
    if spec.pair == "var_var":
        theta2 = return_level(eta, kappa, scales[1])
        return JacobianBlocks(a=theta, b=dtheta_dk, c=theta2, d=_return_level_dkappa(eta, kappa, scales[1]))
    sigma = np.exp(eta)
    one_minus = 1.0 - kappa
    zeta = (theta + sigma) / one_minus
    dzeta_dk = dtheta_dk / one_minus + (theta + sigma) / one_minus**2
    return JacobianBlocks(a=theta, b=dtheta_dk, c=zeta, d=dzeta_dk)


def jacobian_blocks(lam: Lambda, spec: FunctionalSpec) -> JacobianBlocks:
    """
    Block-diagonal Jacobian of the functionals with respect to ``(eta, kappa)``.

    Raises:
        FunctionalUndefinedError: ``kappa >= 1`` under ``var_es``.
        SingularBlockError: some block has ``|det| <= 1e-12``.
    """
    if spec.pair == "var_es":
        _check_es_defined(lam.kappa)
    blocks = jacobian_entries(lam.eta, lam.kappa, spec)
    singular = blocks.singular_indices()
    if singular.size:
        err_msg = (
            f"Jacobian block is singular at {singular.size} observation(s), first {singular[:10].tolist()}; "
            f"the functional pair is not identifiable there."
        )
        raise SingularBlockError(err_msg, indices=tuple(int(i) for i in singular))
    return blocks


__all__ = [
    "DET_EPS",
    "KAPPA_EPS",
    "JacobianBlocks",
    "Lambda",
    "functional_map",
    "gpd_loglik",
    "gpd_loglik_grad",
    "gpd_loglik_grad_terms",
    "gpd_loglik_terms",
    "jacobian_blocks",
    "jacobian_entries",
    "return_level",
]
