# -*- coding: utf-8 -*-


import math
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
import pandas as pd

from .errors import InvalidInputError, MissingColumnError, ParseError
from .utils.logging import get_logger
from .utils.misc import ensure_list
from .utils.path import require_file, resolve_path

_logger = get_logger(__name__)

ColumnKind = Literal["numeric", "factor"]

FLOAT_FORMAT = "%.17g"
MIN_ROWS = 3

_LINE_PATTERN = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class Dataset:
    """
    A response column plus named covariates, with no missing entries.

    Numeric columns are ``float64``; factor columns hold string labels and
    their levels in first-appearance order.
    """

    frame: pd.DataFrame
    response: str
    column_kinds: dict[str, ColumnKind]
    n_dropped: int = 0
    exceed_prob: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.frame)

    @property
    def y(self) -> np.ndarray:
        return self.frame[self.response].to_numpy(dtype=np.float64)

    @property
    def covariate_names(self) -> list[str]:
        return [name for name in self.frame.columns if name != self.response]

    @property
    def W(self) -> pd.DataFrame:  # noqa: N802
        return self.frame[self.covariate_names]

    def levels(self, name: str) -> list[str]:
        if self.column_kinds.get(name) != "factor":
            err_msg = f"Column `{name}` is not a factor."
            raise InvalidInputError(err_msg)
        return [str(label) for label in pd.unique(self.frame[name])]

    def covariate_matrix(self, names: Sequence[str]) -> np.ndarray:
        """
        Numeric matrix of the named covariates; factor columns become level codes.
        """
        missing = [name for name in names if name not in self.frame.columns]
        if missing:
            err_msg = f"Unknown covariate column(s) {missing}; available: {self.covariate_names}."
            raise MissingColumnError(err_msg)
        columns = []
        for name in names:
            if self.column_kinds[name] == "factor":
                codes, _ = pd.factorize(self.frame[name], sort=False)
                columns.append(codes.astype(np.float64))
            else:
                columns.append(self.frame[name].to_numpy(dtype=np.float64))
        if not columns:
            return np.zeros((self.n, 0))
        return np.column_stack(columns)

    def cell_labels(self, names: Sequence[str]) -> list[str]:
        """Interaction labels ``a:b`` for the named factor columns."""
        parts = [self.frame[name].astype(str) for name in names]
        labels = parts[0]
        for part in parts[1:]:
            labels = labels + ":" + part
        return labels.tolist()


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        err_msg = f"File '{path}' has no header row."
        raise ParseError(err_msg, line=1) from e
    except pd.errors.ParserError as e:
        match = _LINE_PATTERN.search(str(e))
        line = int(match.group(1)) if match else None
        err_msg = f"Malformed CSV '{path}': {e}"
        raise ParseError(err_msg, line=line) from e


def load_csv(
    path: Union[str, Path],
    response_column: str,
    factor_columns: Union[Sequence[str], str] = (),
) -> Dataset:
    """
    Read a comma-separated file with a header row.

    Rows with an empty or non-numeric entry in a numeric column, or an empty
    factor label, are dropped and counted. Row order is preserved.

    Raises:
        FileNotFoundError: the file does not exist.
        ParseError: the file is not valid CSV (carries the line number).
        MissingColumnError: the response or a factor column is absent.
    """
    pobj = require_file(path)
    raw = _read_frame(pobj)
    factors = ensure_list(factor_columns)
    missing = [name for name in [response_column, *factors] if name not in raw.columns]
    if missing:
        err_msg = f"Column(s) {missing} not found in '{pobj.name}'; header is {list(raw.columns)}."
        raise MissingColumnError(err_msg)
    if response_column in factors:
        err_msg = f"The response column `{response_column}` cannot be a factor."
        raise InvalidInputError(err_msg)

    kinds: dict[str, ColumnKind] = {name: "factor" if name in factors else "numeric" for name in raw.columns}
    keep = np.ones(len(raw), dtype=bool)
    parsed: dict[str, Any] = {}
    for name in raw.columns:
        texts = raw[name].str.strip()
        if kinds[name] == "factor":
            keep &= (texts != "").to_numpy()
            parsed[name] = texts
            continue
        values = np.full(len(raw), np.nan)
        for row, text in enumerate(texts):
            try:
                values[row] = _parse_float(text)
            except ValueError:
                keep[row] = False
        parsed[name] = values

    frame = pd.DataFrame(parsed, columns=list(raw.columns))[keep].reset_index(drop=True)
    n_dropped = int((~keep).sum())
    if n_dropped:
        # header is line 1
        lines = (np.flatnonzero(~keep) + 2).tolist()
        _logger.warning("> Dropped %d row(s) with missing or malformed entries (lines %s)", n_dropped, lines[:10])
    if len(frame) < MIN_ROWS:
        err_msg = f"Need at least {MIN_ROWS} complete rows, got {len(frame)} after dropping {n_dropped}."
        raise InvalidInputError(err_msg)
    _logger.info("> Loaded %d rows and %d columns from '%s'", len(frame), len(frame.columns), pobj)
    return Dataset(frame=frame, response=response_column, column_kinds=kinds, n_dropped=n_dropped)


def make_dataset(
    columns: Mapping[str, Iterable[Any]],
    response: str = "y",
    factors: Sequence[str] = (),
) -> Dataset:
    frame = pd.DataFrame({name: list(values) for name, values in columns.items()})
    kinds: dict[str, ColumnKind] = {}
    for name in frame.columns:
        if name in factors:
            frame[name] = frame[name].astype(str)
            kinds[name] = "factor"
        else:
            frame[name] = frame[name].astype(np.float64)
            kinds[name] = "numeric"
    return Dataset(frame=frame, response=response, column_kinds=kinds)


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    pobj = resolve_path(path)
    frame.to_csv(pobj, index=False, float_format=FLOAT_FORMAT)
    return pobj


def write_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write with 17 significant digits so that reloading reproduces every float exactly."""
    return write_table(dataset.frame, path)


def excesses_over_threshold(dataset: Dataset, threshold: float) -> Dataset:
    """
    Rows whose response exceeds ``threshold``, with the response replaced by the excess.

    The fraction of rows kept is recorded as ``exceed_prob``.
    """
    y = dataset.y
    above = y > threshold
    n_above = int(above.sum())
    if n_above < MIN_ROWS:
        err_msg = f"Only {n_above} observation(s) exceed the threshold {threshold:g}."
        raise InvalidInputError(err_msg)
    frame = dataset.frame[above].reset_index(drop=True)
    frame[dataset.response] = y[above] - threshold
    exceed_prob = n_above / dataset.n
    _logger.info("> %d of %d observations exceed %g (fraction %.4f)", n_above, dataset.n, threshold, exceed_prob)
    return replace(dataset, frame=frame, exceed_prob=exceed_prob)


def trace_frame(rows: Sequence[Mapping[str, Any]]) -> pd.DataFrame:
    columns = [
        "iteration",
        "objective",
        "g_norm",
        "slope",
        "eps",
        "tau",
        "step",
        "method",
        "backtracks",
        "event",
        "accepted",
    ]
    return pd.DataFrame(list(rows), columns=columns)
