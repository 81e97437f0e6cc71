# -*- coding: utf-8 -*-


from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, Literal, Optional, Union

import msgspec

from gradsample.utils.serialization import load_yaml

from .functionals import FunctionalPair
from .gs import GsParams
from .smoothers import CellFactorSpec, LinearSpec, LocalLinearSpec, SmootherSpec

Task = Literal["fit-quantile", "fit-pot", "simulate", "gradcheck", "minimize"]
Generator = Literal["gpd", "sales"]

_GS_FIELDS = frozenset(fld.encode_name for fld in msgspec.structs.fields(GsParams))


class RunConfig(msgspec.Struct, frozen=True, forbid_unknown_fields=True):
    task: Task
    gs: GsParams = msgspec.field(default_factory=GsParams)
    input: Optional[str] = None
    output_dir: str = "gradsample_output"
    response: str = "y"
    factors: tuple[str, ...] = ()
    # column (or "a:b" interaction) -> "kind[:bw=..|df=..]"
    smoothers: dict[str, str] = {}
    alpha: float = 0.5
    pair: FunctionalPair = "var_es"
    levels: tuple[float, ...] = (0.01,)
    exceed_prob: Optional[float] = None
    threshold: Optional[float] = None
    report_levels: tuple[float, ...] = ()
    objective: str = "nsrosenbrock"
    x0: Optional[tuple[float, ...]] = None
    gradcheck_tol: float = 1e-4
    generator: Generator = "gpd"
    n: int = 1000
    sigma: float = 2.0
    kappa: float = 0.2
    days: int = 28
    hours_per_day: int = 17
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            err_msg = f"`alpha` must lie in (0, 1), but got {self.alpha}."
            raise ValueError(err_msg)
        if self.exceed_prob is not None and not 0.0 < self.exceed_prob < 1.0:
            err_msg = f"`exceed_prob` must lie in (0, 1), but got {self.exceed_prob}."
            raise ValueError(err_msg)
        if self.task in ("fit-quantile", "fit-pot") and self.input is None:
            err_msg = f"`input` is required for task `{self.task}`."
            raise ValueError(err_msg)
        if self.n < 1:
            err_msg = f"`n` must be a positive integer, but got {self.n}."
            raise ValueError(err_msg)
        if self.sigma <= 0.0:
            err_msg = f"`sigma` must be positive, but got {self.sigma}."
            raise ValueError(err_msg)
        if self.gradcheck_tol <= 0.0:
            err_msg = f"`gradcheck_tol` must be positive, but got {self.gradcheck_tol}."
            raise ValueError(err_msg)


def load_run_config(
    config_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Merge defaults, a flat YAML file and command-line overrides (in that order).

    Keys that name a ``GsParams`` field are routed into the nested ``gs``
    struct so that the file stays a single flat mapping.
    """
    flat: dict[str, Any] = {}
    if config_file is not None:
        flat.update(load_yaml(config_file))
    if overrides is not None:
        flat.update({key: value for key, value in overrides.items() if value is not None})

    gs_values = {key: flat.pop(key) for key in list(flat) if key in _GS_FIELDS}
    nested_gs = flat.pop("gs", None)
    if isinstance(nested_gs, Mapping):
        gs_values = {**nested_gs, **gs_values}
    flat["gs"] = gs_values
    return msgspec.convert(flat, RunConfig)


def parse_smoother_option(column_key: str, text: str, columns: Sequence[str]) -> SmootherSpec:
    """
    Parse one ``--smoother`` value such as ``local_linear:df=10`` for ``column_key``.

    ``column_key`` may be an interaction like ``day:hour`` (cell_factor only).
    """
    names = column_key.split(":")
    missing = [name for name in names if name not in columns]
    if missing:
        err_msg = f"Smoother refers to unknown column(s) {missing}; available: {list(columns)}."
        raise ValueError(err_msg)
    indices = [list(columns).index(name) for name in names]

    kind, _, options_text = text.partition(":")
    options: dict[str, float] = {}
    for item in filter(None, options_text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            err_msg = f"Malformed smoother option `{item}` for column `{column_key}`, expected key=value."
            raise ValueError(err_msg)
        options[key.strip()] = float(value)

    if kind != "cell_factor" and len(indices) > 1:
        err_msg = f"Only cell_factor smoothers accept interactions, got `{kind}` for `{column_key}`."
        raise ValueError(err_msg)
    if kind == "local_linear":
        unknown = set(options) - {"bw", "df"}
        if unknown:
            err_msg = f"Unknown local_linear option(s) {sorted(unknown)} for column `{column_key}`."
            raise ValueError(err_msg)
        return LocalLinearSpec(indices[0], bandwidth=options.get("bw"), target_df=options.get("df"))
    if options:
        err_msg = f"Smoother kind `{kind}` takes no options, got {sorted(options)} for column `{column_key}`."
        raise ValueError(err_msg)
    if kind == "linear":
        return LinearSpec(indices[0])
    if kind == "cell_factor":
        return CellFactorSpec(indices[0], interaction=tuple(indices[1:]))
    err_msg = f"Smoother kind `{kind}` is not supported."
    raise ValueError(err_msg)
