# -*- coding: utf-8 -*-


from typing import Literal, Optional

import msgspec

SubgradientMode = Literal["qp", "average"]


class GsParams(msgspec.Struct, frozen=True, forbid_unknown_fields=True):
    """
    Hyperparameters of the gradient sampling descent.

    ``m`` and ``subgradient_mode`` may stay unset: ``m`` then resolves to
    ``dim + 1`` and the mode to the default of the calling routine.
    """

    m: Optional[int] = None
    beta: float = 0.1
    mu: float = 0.5
    lam: float = msgspec.field(default=0.5, name="lambda")
    eps0: float = 0.1
    tau0: float = 1e-2
    eps_min: float = 1e-6
    tau_min: float = 1e-6
    max_iter: int = 5000
    max_backtracks: int = 30
    subgradient_mode: Optional[SubgradientMode] = None
    seed: int = 0
    m_override: bool = False
    n_workers: int = 1
    qp_tol: float = 1e-10
    per_sample_jacobian: bool = False

    def __post_init__(self) -> None:
        for name in ("beta", "mu", "lam"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                err_msg = f"`{name}` must lie in (0, 1), but got {value}."
                raise ValueError(err_msg)
        for name in ("eps0", "tau0", "eps_min", "tau_min", "qp_tol"):
            if getattr(self, name) <= 0.0:
                err_msg = f"`{name}` must be positive, but got {getattr(self, name)}."
                raise ValueError(err_msg)
        if self.eps_min >= self.eps0:
            err_msg = f"`eps_min` ({self.eps_min}) must be smaller than `eps0` ({self.eps0})."
            raise ValueError(err_msg)
        if self.tau_min >= self.tau0:
            err_msg = f"`tau_min` ({self.tau_min}) must be smaller than `tau0` ({self.tau0})."
            raise ValueError(err_msg)
        if self.m is not None and self.m < 1:
            err_msg = f"`m` must be a positive integer, but got {self.m}."
            raise ValueError(err_msg)
        for name in ("max_iter", "max_backtracks", "n_workers"):
            if getattr(self, name) < 1:
                err_msg = f"`{name}` must be a positive integer, but got {getattr(self, name)}."
                raise ValueError(err_msg)

    def with_mode(self, mode: SubgradientMode) -> "GsParams":
        """Fill an unset ``subgradient_mode`` with ``mode``."""
        if self.subgradient_mode is not None:
            return self
        return msgspec.structs.replace(self, subgradient_mode=mode)
