# tests/conftest.py
import numpy as np
import pytest

from gradsample.configs import FunctionalSpec, GsParams
from gradsample.simulate import gpd_inverse_cdf


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def gs_params():
    """Default descent hyperparameters, shared because the struct is frozen."""
    return GsParams()


@pytest.fixture(scope="session")
def var_es_spec():
    # c = 0.01 / 0.1 = 0.1
    return FunctionalSpec(pair="var_es", levels=(0.01,), exceed_prob=0.1)


@pytest.fixture(scope="session")
def var_var_spec():
    # c = (0.1, 0.02)
    return FunctionalSpec(pair="var_var", levels=(0.01, 0.002), exceed_prob=0.1)


@pytest.fixture
def gpd_sample():
    """Draw ``n`` iid GPD(sigma, kappa) excesses with a fixed seed."""

    def _draw(n: int, sigma: float = 2.0, kappa: float = 0.2, seed: int = 0) -> np.ndarray:
        u = np.random.default_rng(seed).random(n)
        return gpd_inverse_cdf(u, sigma, kappa)

    return _draw


@pytest.fixture
def heteroscedastic_data():
    def _make(n: int = 1000, seed: int = 1) -> tuple[np.ndarray, np.ndarray]:
        gen = np.random.default_rng(seed)
        w = np.sort(gen.uniform(0.0, 1.0, n))
        y = np.sin(2.0 * np.pi * w) + (0.5 + 0.4 * w) * gen.standard_normal(n)
        return w, y

    return _make


@pytest.fixture
def write_csv(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
