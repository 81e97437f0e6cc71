# -*- coding: utf-8 -*-


import warnings

import numpy as np
import pandas as pd

from gradsample.configs import CellFactorSpec
from gradsample.errors import ExtrapolationWarning

from ._base_smoother import Smoother


def _cell_index(columns: np.ndarray) -> pd.MultiIndex:
    columns = np.asarray(columns, dtype=np.float64)
    return pd.MultiIndex.from_arrays([columns[:, j] for j in range(columns.shape[1])])


def cell_codes(columns: np.ndarray) -> tuple[np.ndarray, list[tuple[float, ...]]]:
    """
    Joint codes for the rows of ``columns`` (one column per crossed factor).

    Cells are numbered in order of first appearance.
    """
    codes, cells = _cell_index(columns).factorize(sort=False)
    return np.asarray(codes, dtype=np.intp), list(cells)


def group_means(codes: np.ndarray, g: np.ndarray, n_levels: int) -> np.ndarray:
    sums = np.bincount(codes, weights=g, minlength=n_levels)
    counts = np.bincount(codes, minlength=n_levels)
    return sums / counts


class CellFactorSmoother(Smoother[CellFactorSpec]):
    """Per-cell means of a (possibly crossed) factor; columns hold factor codes."""

    def __init__(self, spec: CellFactorSpec, covariates: np.ndarray) -> None:
        super().__init__(spec, covariates)
        self.columns = self.column_indices(spec)
        self.codes, self.cells = cell_codes(covariates[:, list(self.columns)])
        self.n_levels = len(self.cells)
        self._cells = pd.MultiIndex.from_tuples(self.cells)

    @property
    def df(self) -> float:
        return float(self.n_levels)

    def smooth(self, g: np.ndarray) -> np.ndarray:
        return group_means(self.codes, g, self.n_levels)[self.codes]

    def predict(self, g: np.ndarray, covariates: np.ndarray) -> np.ndarray:
        means = group_means(self.codes, g, self.n_levels)
        # unseen cells get the overall mean, i.e. a zero effect after centering
        fallback = float(np.mean(g))
        new_codes = self._cells.get_indexer(_cell_index(covariates[:, list(self.columns)]))
        unseen = new_codes < 0
        if unseen.any():
            warn_msg = f"{int(unseen.sum())} prediction row(s) fall in cells absent from the training data."
            warnings.warn(warn_msg, ExtrapolationWarning, stacklevel=2)
        return np.where(unseen, fallback, means[np.maximum(new_codes, 0)])
