# tests/cli/test_cli.py
import pandas as pd
import pytest

from gradsample.cli import EXIT_INPUT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main
from gradsample.configs import CellFactorSpec, LocalLinearSpec, load_run_config, parse_smoother_option
from gradsample.utils.serialization import load_yaml


def _simulate(out_dir, *extra):
    assert main(["simulate", "--output-dir", str(out_dir), *extra]) == EXIT_OK
    return out_dir / "simulated.csv"


def test_minimize_quadratic(tmp_path):
    assert main(["minimize", "--objective", "quadratic", "--output-dir", str(tmp_path)]) == EXIT_OK
    diagnostics = load_yaml(tmp_path / "diagnostics.yaml")
    assert diagnostics["converged"] is True
    assert diagnostics["distance_to_minimizer"] <= 1e-2

    trace = pd.read_csv(tmp_path / "trace.csv")
    accepted = trace.loc[trace["accepted"], "objective"]
    assert accepted.is_monotonic_decreasing
    assert accepted.is_unique
    assert set(trace["event"]) <= {"step", "stationary", "line_search_failed", "sampling_exhausted"}


def test_minimize_is_deterministic(tmp_path):
    codes = []
    for name in ("a", "b"):
        argv = ["minimize", "--objective", "l1", "--x0", "3", "4", "--seed", "5", "--output-dir", str(tmp_path / name)]
        codes.append(main(argv))
    assert codes[0] == codes[1]
    for artifact in ("trace.csv", "diagnostics.yaml"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_minimize_reports_iteration_cap(tmp_path):
    argv = ["minimize", "--objective", "l1", "--max-iter", "2", "--output-dir", str(tmp_path)]
    with pytest.warns(UserWarning):
        assert main(argv) == EXIT_NOT_CONVERGED
    assert load_yaml(tmp_path / "diagnostics.yaml")["converged"] is False


def test_simulate_generators(tmp_path):
    gpd = pd.read_csv(_simulate(tmp_path / "gpd", "--n", "50", "--seed", "3"))
    assert list(gpd.columns) == ["y", "t"]
    assert len(gpd) == 50
    assert (gpd["y"] > 0.0).all()

    sales = pd.read_csv(_simulate(tmp_path / "sales", "--generator", "sales", "--days", "14"))
    assert list(sales.columns) == ["y", "day", "hour"]
    assert len(sales) == 14 * 17
    assert sales["day"].iloc[0] == "Mon"


@pytest.mark.parametrize(
    "argv",
    [
        ["--objective", "pot", "--n", "200"],
        ["--objective", "pot", "--n", "100", "--pair", "var_var", "--levels", "0.01", "0.002"],
        ["--objective", "pinball", "--alpha", "0.9"],
        ["--objective", "nsrosenbrock"],
    ],
)
def test_gradcheck_passes(tmp_path, argv):
    assert main(["gradcheck", *argv, "--output-dir", str(tmp_path)]) == EXIT_OK
    diagnostics = load_yaml(tmp_path / "diagnostics.yaml")
    assert diagnostics["passed"] is True
    assert diagnostics["max_error"] < 1e-4


def test_gradcheck_failure_is_reported(tmp_path):
    argv = ["gradcheck", "--objective", "pot", "--n", "50", "--gradcheck-tol", "1e-14", "--output-dir", str(tmp_path)]
    assert main(argv) == EXIT_NOT_CONVERGED
    assert load_yaml(tmp_path / "diagnostics.yaml")["passed"] is False


@pytest.mark.filterwarnings("ignore::gradsample.errors.NonConvergenceWarning")
def test_fit_quantile_on_sales(tmp_path):
    data = _simulate(tmp_path / "data", "--generator", "sales", "--days", "14", "--hours-per-day", "4")
    out_dir = tmp_path / "fit"
    argv = [
        "fit-quantile",
        "--input",
        str(data),
        "--factors",
        "day",
        "hour",
        "--smoother",
        "day:hour=cell_factor",
        "--alpha",
        "0.8",
        "--max-iter",
        "40",
        "--output-dir",
        str(out_dir),
    ]
    assert main(argv) in (EXIT_OK, EXIT_NOT_CONVERGED)
    diagnostics = load_yaml(out_dir / "diagnostics.yaml")
    assert 0.0 <= diagnostics["coverage"] <= 1.0
    assert len(diagnostics["coverage_by_day:hour"]) == 28
    assert diagnostics["max_abs_component_mean"] <= 1e-6

    fitted = pd.read_csv(out_dir / "fitted.csv")
    decomposition = pd.read_csv(out_dir / "decomposition.csv")
    assert list(decomposition.columns) == ["intercept", "day:hour"]
    assert (fitted["q"] - decomposition.sum(axis=1)).abs().max() <= 1e-6


@pytest.mark.filterwarnings("ignore::gradsample.errors.NonConvergenceWarning")
def test_fit_pot_with_threshold(tmp_path):
    data = _simulate(tmp_path / "data", "--n", "120", "--seed", "2")
    out_dir = tmp_path / "fit"
    argv = [
        "fit-pot",
        "--input",
        str(data),
        "--threshold",
        "1.0",
        "--smoother",
        "t=linear",
        "--report-levels",
        "0.02",
        "--max-iter",
        "30",
        "--output-dir",
        str(out_dir),
    ]
    assert main(argv) in (EXIT_OK, EXIT_NOT_CONVERGED)
    diagnostics = load_yaml(out_dir / "diagnostics.yaml")
    assert 0.0 < diagnostics["exceed_prob"] < 1.0
    assert diagnostics["pair"] == "var_es"

    fitted = pd.read_csv(out_dir / "fitted.csv")
    assert {"sigma", "kappa", "var", "es", "rl_0.02"} <= set(fitted.columns)
    assert (fitted["sigma"] > 0.0).all()
    decomposition = pd.read_csv(out_dir / "decomposition.csv")
    assert list(decomposition.columns) == ["var_intercept", "var_t", "es_intercept", "es_t"]


def test_fit_pot_needs_exceed_prob(tmp_path):
    data = _simulate(tmp_path / "data", "--n", "30")
    assert main(["fit-pot", "--input", str(data), "--output-dir", str(tmp_path / "fit")]) == EXIT_INPUT_ERROR


def test_input_errors(tmp_path, write_csv):
    missing = tmp_path / "absent.csv"
    assert main(["fit-quantile", "--input", str(missing), "--output-dir", str(tmp_path)]) == EXIT_INPUT_ERROR

    data = write_csv("small.csv", "y,w\n1,0.1\n2,0.2\n3,0.3\n4,0.4\n")
    bad_kind = ["fit-quantile", "--input", str(data), "--smoother", "w=spline", "--output-dir", str(tmp_path)]
    assert main(bad_kind) == EXIT_INPUT_ERROR
    bad_response = ["fit-quantile", "--input", str(data), "--response", "z", "--output-dir", str(tmp_path)]
    assert main(bad_response) == EXIT_INPUT_ERROR
    bad_column = ["fit-quantile", "--input", str(data), "--smoother", "v=linear", "--output-dir", str(tmp_path)]
    assert main(bad_column) == EXIT_INPUT_ERROR
    assert main(["minimize", "--objective", "rastrigin", "--output-dir", str(tmp_path)]) == EXIT_INPUT_ERROR


def test_config_file_and_overrides(write_csv):
    config_file = write_csv(
        "run.yaml",
        "task: fit-quantile\ninput: data.csv\nalpha: 0.25\nlambda: 0.3\nmax_iter: 10\n"
        "smoothers:\n  w: local_linear:df=4\n",
    )
    config = load_run_config(config_file, {"alpha": 0.75, "seed": None})
    assert config.alpha == 0.75
    assert config.gs.lam == 0.3
    assert config.gs.max_iter == 10
    assert config.gs.seed == 0
    assert config.smoothers == {"w": "local_linear:df=4"}


def test_config_rejects_unknown_keys(write_csv):
    config_file = write_csv("bad.yaml", "task: minimize\nbandwidth_rule: silverman\n")
    with pytest.raises(Exception, match="bandwidth_rule"):
        load_run_config(config_file)


def test_parse_smoother_option():
    columns = ["w", "day", "hour"]
    assert parse_smoother_option("w", "local_linear:df=10", columns) == LocalLinearSpec(0, target_df=10.0)
    assert parse_smoother_option("w", "local_linear:bw=0.2", columns) == LocalLinearSpec(0, bandwidth=0.2)
    assert parse_smoother_option("day:hour", "cell_factor", columns) == CellFactorSpec(1, interaction=(2,))
    with pytest.raises(ValueError):
        parse_smoother_option("day:hour", "linear", columns)
    with pytest.raises(ValueError):
        parse_smoother_option("w", "linear:bw=1", columns)
    with pytest.raises(ValueError):
        parse_smoother_option("x", "linear", columns)
