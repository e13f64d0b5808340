"""Shared fixtures and the --runslow switch for the long reproduction runs."""

import numpy as np
import pytest

from opdyn_cli.engine.common import HybridConfig, ModelSpec, get_settings


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow reproduction tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_hermitian(rng):
    def make(dim: int = 4) -> np.ndarray:
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return 0.5 * (a + a.conj().T)
    return make


@pytest.fixture
def small_config():
    """Cheap hybrid configuration: 6 Ising sites, 30 steps."""
    def make(**overrides) -> HybridConfig:
        spec_fields = {"model": "ising", "n_sites": 6, "j": 1.0, "h": 1.0, "delta_aniso": 0.0}
        for key in list(overrides):
            if key in spec_fields:
                spec_fields[key] = overrides.pop(key)
        fields = {
            "model_spec": ModelSpec(**spec_fields),
            "delta": 0.05,
            "total_steps": 30,
            "train_pairs": 10,
            "window": 4,
            "hidden": 8,
            "max_bond": 64,
            "max_epochs": 200,
        }
        fields.update(overrides)
        return HybridConfig(**fields)
    return make
