# -*- coding: utf-8 -*-


import warnings
from abc import ABC, abstractmethod
from typing import Generic, TypeVar

import numpy as np

from gradsample.configs import SmootherSpec
from gradsample.errors import ExtrapolationWarning, InvalidInputError

SpecT = TypeVar("SpecT", bound=SmootherSpec)


class Smoother(ABC, Generic[SpecT]):
    """
    A linear scatterplot smoother bound to the training covariates.

    Subclasses precompute whatever the training design allows (hat matrix,
    group codes, regression moments) so that repeated calls to ``smooth`` in a
    backfitting loop are cheap.
    """

    def __init__(self, spec: SpecT, covariates: np.ndarray) -> None:
        if covariates.ndim != 2:
            err_msg = f"Covariates must form an (n, k) matrix, got shape {covariates.shape}."
            raise InvalidInputError(err_msg)
        for idx in self.column_indices(spec):
            if not 0 <= idx < covariates.shape[1]:
                err_msg = f"Smoother refers to covariate {idx}, but only {covariates.shape[1]} columns exist."
                raise InvalidInputError(err_msg)
        self.spec = spec
        self.n = covariates.shape[0]

    @staticmethod
    def column_indices(spec: SmootherSpec) -> tuple[int, ...]:
        return (spec.covariate_index, *getattr(spec, "interaction", ()))

    @property
    @abstractmethod
    def df(self) -> float:
        """Trace of the smoother's hat operator on the training design."""
        pass

    @abstractmethod
    def smooth(self, g: np.ndarray) -> np.ndarray:
        """Fitted values at the training covariates for the response ``g``."""
        pass

    @abstractmethod
    def predict(self, g: np.ndarray, covariates: np.ndarray) -> np.ndarray:
        """
        Evaluate the smooth of ``g`` (a training-length response) at new covariates.

        ``covariates`` has the same column layout as the training matrix.
        """
        pass

    def _check_range(self, train: np.ndarray, new: np.ndarray) -> None:
        low, high = float(train.min()), float(train.max())
        outside = (new < low) | (new > high)
        if outside.any():
            warn_msg = (
                f"{int(outside.sum())} prediction point(s) lie outside the training range "
                f"[{low:g}, {high:g}] of covariate {self.spec.covariate_index}."
            )
            warnings.warn(warn_msg, ExtrapolationWarning, stacklevel=3)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(columns={self.column_indices(self.spec)}, n={self.n})"
