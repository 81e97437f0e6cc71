# -*- coding: utf-8 -*-


import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Optional

import msgspec
import numpy as np
import pandas as pd

from .configs import (
    CellFactorSpec,
    FunctionalSpec,
    GsParams,
    RunConfig,
    SmootherSpec,
    load_run_config,
    parse_smoother_option,
)
from .data import Dataset, excesses_over_threshold, load_csv, trace_frame, write_dataset, write_table
from .diagnostics import GradCheckReport, gradcheck, jacobian_check
from .errors import FunctionalUndefinedError, GradSampleError, NumericalFailureError
from .gpd import Lambda
from .gs_engine import FitTrace, gsda_minimize
from .objectives import default_start, get_objective, known_minimizer, list_objectives
from .pot_fit import PotModel, fit_pot_additive, moment_start, negative_loglik_objective, return_levels
from .quantile_fit import PinballObjective, QuantileModel, empirical_coverage, fit_quantile_additive
from .simulate import simulate_gpd, simulate_sales
from .smoothing import AdditiveFit
from .utils.logging import get_logger, setup_logging
from .utils.msgspec import struct_to_dict
from .utils.path import mkdir
from .utils.serialization import dump_yaml

_logger = get_logger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3
EXIT_NUMERICAL_FAILURE = 4

_TASKS = ("fit-quantile", "fit-pot", "simulate", "gradcheck", "minimize")


def _smoother_setup(config: RunConfig, dataset: Dataset) -> tuple[list[str], np.ndarray, list[SmootherSpec]]:
    keys = list(config.smoothers)
    names: list[str] = []
    for key in keys:
        names.extend(name for name in key.split(":") if name not in names)
    specs = [parse_smoother_option(key, config.smoothers[key], names) for key in keys]
    for key, spec in zip(keys, specs):
        if not isinstance(spec, CellFactorSpec) and dataset.column_kinds.get(names[spec.covariate_index]) == "factor":
            err_msg = f"Column `{key}` is a factor; only cell_factor smoothers apply to factors."
            raise ValueError(err_msg)
    return keys, dataset.covariate_matrix(names), specs


def _decomposition_columns(fit: AdditiveFit, keys: Sequence[str], prefix: str = "") -> dict[str, np.ndarray]:
    columns = {f"{prefix}intercept": np.full(fit.components.shape[0], fit.intercept)}
    for j, key in enumerate(keys):
        columns[f"{prefix}{key}"] = fit.components[:, j]
    return columns


def _trace_summary(trace: FitTrace, gs: GsParams) -> dict[str, Any]:
    return {
        "gs": struct_to_dict(gs),
        "converged": trace.converged,
        "n_iter": trace.n_iter,
        "n_accepted": int(sum(rec.accepted for rec in trace.records)),
        "final_objective": trace.final_objective,
    }


def _write_outputs(
    output_dir: Path,
    trace: FitTrace,
    diagnostics: dict[str, Any],
    fitted: Optional[pd.DataFrame] = None,
    decomposition: Optional[pd.DataFrame] = None,
) -> None:
    if fitted is not None:
        write_table(fitted, output_dir / "fitted.csv")
    if decomposition is not None:
        write_table(decomposition, output_dir / "decomposition.csv")
    write_table(trace_frame(trace.to_rows()), output_dir / "trace.csv")
    dump_yaml(diagnostics, output_dir / "diagnostics.yaml")
    _logger.info("> Wrote results to '%s'", output_dir)


def _load_input(config: RunConfig) -> Dataset:
    if config.input is None:
        err_msg = f"`input` is required for task `{config.task}`."
        raise ValueError(err_msg)
    return load_csv(config.input, config.response, config.factors)


def _run_fit_quantile(config: RunConfig, output_dir: Path) -> int:
    dataset = _load_input(config)
    keys, covariates, specs = _smoother_setup(config, dataset)
    model: QuantileModel = fit_quantile_additive(dataset.y, covariates, config.alpha, specs, config.gs)

    coverage = empirical_coverage(dataset.y, model.q)
    diagnostics: dict[str, Any] = {
        "task": config.task,
        **_trace_summary(model.trace, config.gs),
        "alpha": config.alpha,
        "n_obs": dataset.n,
        "n_dropped": dataset.n_dropped,
        "coverage": coverage.overall,
        "max_abs_component_mean": float(np.abs(model.decomposition.component_means()).max(initial=0.0)),
    }
    for key, spec in zip(keys, specs):
        if isinstance(spec, CellFactorSpec):
            cells = dataset.cell_labels(key.split(":"))
            diagnostics[f"coverage_by_{key}"] = empirical_coverage(dataset.y, model.q, groups=cells).by_group

    fitted = dataset.frame.assign(q=model.q)
    decomposition = pd.DataFrame(_decomposition_columns(model.decomposition, keys))
    _write_outputs(output_dir, model.trace, diagnostics, fitted, decomposition)
    return EXIT_OK if model.converged else EXIT_NOT_CONVERGED


def _functional_spec(config: RunConfig, dataset_exceed: Optional[float]) -> FunctionalSpec:
    exceed_prob = config.exceed_prob if config.exceed_prob is not None else dataset_exceed
    if exceed_prob is None:
        err_msg = "`exceed_prob` is unknown: pass it explicitly or give a `threshold` to estimate it."
        raise ValueError(err_msg)
    return FunctionalSpec(pair=config.pair, levels=config.levels, exceed_prob=exceed_prob)


def _run_fit_pot(config: RunConfig, output_dir: Path) -> int:
    dataset = _load_input(config)
    if config.threshold is not None:
        dataset = excesses_over_threshold(dataset, config.threshold)
    spec = _functional_spec(config, dataset.exceed_prob)
    keys, covariates, specs = _smoother_setup(config, dataset)
    model: PotModel = fit_pot_additive(dataset.y, covariates, spec, specs, config.gs)

    first, second = model.names
    lam = model.state.lam
    fitted = dataset.frame.assign(sigma=lam.sigma, kappa=lam.kappa)
    fitted[first], fitted[second] = model.state.theta
    if config.report_levels:
        extra = return_levels(model, config.report_levels)
        for j, level in enumerate(config.report_levels):
            fitted[f"rl_{level:g}"] = extra[:, j]

    decomposition = pd.DataFrame(
        {
            **_decomposition_columns(model.decompositions[0], keys, prefix=f"{first}_"),
            **_decomposition_columns(model.decompositions[1], keys, prefix=f"{second}_"),
        }
    )
    component_means = np.concatenate([fit.component_means() for fit in model.decompositions])
    diagnostics: dict[str, Any] = {
        "task": config.task,
        **_trace_summary(model.trace, config.gs),
        "loglik": model.loglik,
        "pair": spec.pair,
        "levels": list(spec.levels),
        "scale_factors": list(spec.scale_factors),
        "exceed_prob": spec.exceed_prob,
        "threshold": config.threshold,
        "n_obs": dataset.n,
        "n_dropped": dataset.n_dropped,
        "curves_ordered": bool(spec.pair != "var_var" or np.all(model.state.theta[1] > model.state.theta[0])),
        "max_abs_component_mean": float(np.abs(component_means).max(initial=0.0)),
    }
    _write_outputs(output_dir, model.trace, diagnostics, fitted, decomposition)
    return EXIT_OK if model.converged else EXIT_NOT_CONVERGED


def _run_simulate(config: RunConfig, output_dir: Path) -> int:
    seed = config.gs.seed
    if config.generator == "sales":
        dataset = simulate_sales(config.days, config.hours_per_day, seed)
    else:
        dataset = simulate_gpd(config.n, config.sigma, config.kappa, seed)
    path = write_dataset(dataset, output_dir / "simulated.csv")
    diagnostics = {"task": config.task, "generator": config.generator, "seed": seed, "n_obs": dataset.n}
    dump_yaml(diagnostics, output_dir / "diagnostics.yaml")
    _logger.info("> Wrote %d simulated rows to '%s'", dataset.n, path)
    return EXIT_OK


def _check_points(config: RunConfig, rng: np.random.Generator) -> tuple[str, list[tuple[str, GradCheckReport]]]:
    name = config.objective.lower()
    if name == "pot":
        if config.input is not None:
            dataset = _load_input(config)
            if config.threshold is not None:
                dataset = excesses_over_threshold(dataset, config.threshold)
        else:
            dataset = simulate_gpd(config.n, config.sigma, config.kappa, config.gs.seed)
        spec = FunctionalSpec(pair=config.pair, levels=config.levels, exceed_prob=config.exceed_prob or 0.1)
        y = dataset.y
        sigma0, kappa0 = moment_start(y)
        lam = Lambda.from_sigma(
            sigma0 * np.exp(0.05 * rng.standard_normal(y.size)), kappa0 + 0.05 * rng.standard_normal(y.size)
        )
        if not lam.is_feasible(y):
            lam = Lambda.from_sigma(np.full(y.size, sigma0), np.full(y.size, kappa0))
        objective = negative_loglik_objective(y, spec)
        return name, [("loglik", gradcheck(objective, lam.as_vector())), ("jacobian", jacobian_check(lam, spec))]

    if name == "pinball":
        y = _load_input(config).y if config.input is not None else rng.random(config.n)
        offsets = rng.uniform(0.01, 0.5, y.size) * rng.choice([-1.0, 1.0], y.size)
        return name, [("pinball", gradcheck(PinballObjective(y, config.alpha), y + offsets))]

    x0 = np.asarray(config.x0, dtype=np.float64) if config.x0 is not None else None
    objective = get_objective(name, None if x0 is None else x0.size)
    point = x0 if x0 is not None else np.linspace(0.3, 0.7, objective.dim)
    return name, [(name, gradcheck(objective, point))]


def _run_gradcheck(config: RunConfig, output_dir: Path) -> int:
    rng = np.random.default_rng(config.gs.seed)
    name, reports = _check_points(config, rng)
    max_error = max(report.max_error for _, report in reports)
    passed = max_error < config.gradcheck_tol
    diagnostics: dict[str, Any] = {
        "task": config.task,
        "objective": name,
        "tol": config.gradcheck_tol,
        "max_error": max_error,
        "passed": passed,
    }
    for label, report in reports:
        diagnostics[f"{label}_max_error"] = report.max_error
        diagnostics[f"{label}_worst_index"] = report.worst_index
    dump_yaml(diagnostics, output_dir / "diagnostics.yaml")
    log_fn = _logger.info if passed else _logger.warning
    log_fn("> Gradient check on %s: max mixed error %.3g (tol %.1g)", name, max_error, config.gradcheck_tol)
    return EXIT_OK if passed else EXIT_NOT_CONVERGED


def _run_minimize(config: RunConfig, output_dir: Path) -> int:
    x0 = np.asarray(config.x0, dtype=np.float64) if config.x0 is not None else None
    objective = get_objective(config.objective, None if x0 is None else x0.size)
    start = x0 if x0 is not None else default_start(config.objective, objective.dim)
    x, trace = gsda_minimize(objective, start, config.gs)

    diagnostics: dict[str, Any] = {
        "task": config.task,
        "objective": config.objective,
        **_trace_summary(trace, config.gs),
        "x0": start.tolist(),
        "final_point": x.tolist(),
    }
    optimum = known_minimizer(config.objective, objective.dim)
    if optimum is not None:
        diagnostics["distance_to_minimizer"] = float(np.linalg.norm(x - optimum))
    _write_outputs(output_dir, trace, diagnostics)
    return EXIT_OK if trace.converged else EXIT_NOT_CONVERGED


_TASK_RUNNERS = {
    "fit-quantile": _run_fit_quantile,
    "fit-pot": _run_fit_pot,
    "simulate": _run_simulate,
    "gradcheck": _run_gradcheck,
    "minimize": _run_minimize,
}


def run(config: RunConfig) -> int:
    """Execute one task, write its artifacts to ``config.output_dir`` and return the exit status."""
    output_dir = mkdir(config.output_dir)
    _logger.info("> Running task `%s`", config.task)
    return _TASK_RUNNERS[config.task](config, output_dir)


def _parse_smoother_flags(values: Optional[list[str]]) -> Optional[dict[str, str]]:
    if not values:
        return None
    smoothers: dict[str, str] = {}
    for value in values:
        key, sep, text = value.partition("=")
        if not sep or not key or not text:
            err_msg = f"Malformed --smoother `{value}`, expected <column>=<kind>[:bw=..|df=..]."
            raise ValueError(err_msg)
        smoothers[key.strip()] = text.strip()
    return smoothers


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradsample",
        description="Gradient sampling descent and additive quantile / peaks-over-threshold fitting.",
    )
    subparsers = parser.add_subparsers(dest="task", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="flat YAML file with run settings")
    common.add_argument("--input", type=str, default=None)
    common.add_argument("--output-dir", dest="output_dir", type=str, default=None)
    common.add_argument("--response", type=str, default=None)
    common.add_argument("--factors", type=str, nargs="+", default=None)
    common.add_argument(
        "--smoother",
        action="append",
        default=None,
        help="<column>=<kind>[:bw=..|df=..]; kind is local_linear, linear or cell_factor; "
        "interactions as <a>:<b>=cell_factor",
    )
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--pair", choices=("var_es", "var_var"), default=None)
    common.add_argument("--levels", type=float, nargs="+", default=None)
    common.add_argument("--exceed-prob", dest="exceed_prob", type=float, default=None)
    common.add_argument("--threshold", type=float, default=None)
    common.add_argument("--report-levels", dest="report_levels", type=float, nargs="+", default=None)
    common.add_argument("--objective", type=str, default=None, help=f"one of {list_objectives()}, pot or pinball")
    common.add_argument("--x0", type=float, nargs="+", default=None)
    common.add_argument("--gradcheck-tol", dest="gradcheck_tol", type=float, default=None)
    common.add_argument("--generator", choices=("gpd", "sales"), default=None)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--sigma", type=float, default=None)
    common.add_argument("--kappa", type=float, default=None)
    common.add_argument("--days", type=int, default=None)
    common.add_argument("--hours-per-day", dest="hours_per_day", type=int, default=None)
    common.add_argument("--log-level", dest="log_level", type=str, default=None)

    gs_group = common.add_argument_group("gradient sampling")
    gs_group.add_argument("--m", type=int, default=None)
    gs_group.add_argument("--m-override", dest="m_override", action="store_true", default=None)
    gs_group.add_argument("--beta", type=float, default=None)
    gs_group.add_argument("--mu", type=float, default=None)
    gs_group.add_argument("--lambda", dest="lambda", type=float, default=None)
    gs_group.add_argument("--eps0", type=float, default=None)
    gs_group.add_argument("--tau0", type=float, default=None)
    gs_group.add_argument("--eps-min", dest="eps_min", type=float, default=None)
    gs_group.add_argument("--tau-min", dest="tau_min", type=float, default=None)
    gs_group.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    gs_group.add_argument("--max-backtracks", dest="max_backtracks", type=int, default=None)
    gs_group.add_argument("--mode", dest="subgradient_mode", choices=("qp", "average"), default=None)
    gs_group.add_argument("--seed", type=int, default=None)
    gs_group.add_argument("--workers", dest="n_workers", type=int, default=None)
    gs_group.add_argument(
        "--per-sample-jacobian", dest="per_sample_jacobian", action="store_true", default=None
    )

    for task in _TASKS:
        subparsers.add_parser(task, parents=[common])
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    values = {key: value for key, value in vars(args).items() if key not in ("config", "smoother")}
    for key in ("factors", "levels", "report_levels", "x0"):
        if values.get(key) is not None:
            values[key] = tuple(values[key])
    values["smoothers"] = _parse_smoother_flags(args.smoother)
    return values


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or "INFO")
    try:
        config = load_run_config(args.config, _overrides(args))
        setup_logging(config.log_level)
        return run(config)
    except (NumericalFailureError, FunctionalUndefinedError) as e:
        _logger.error("> Numerical failure: %s", e)
        return EXIT_NUMERICAL_FAILURE
    except (GradSampleError, ValueError, TypeError, KeyError, FileNotFoundError, msgspec.ValidationError) as e:
        _logger.error("> Invalid input or configuration: %s", e)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
