import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qhahn.dynamics import JumpTableCache
from qhahn.scaling import ModelParams, coefficients

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def fig_params():
    """The canonical desk-scale parameter point used throughout."""
    return ModelParams(q=0.2, mu=0.4, nu=0.3)


@pytest.fixture(scope="session")
def fig_theta():
    return 0.4


@pytest.fixture(scope="session")
def fig_coeffs(fig_params, fig_theta):
    return coefficients(fig_params, fig_theta, fig_params.series_config(1e-15))


@pytest.fixture(scope="session")
def fig_cache(fig_params):
    return JumpTableCache(fig_params)


@pytest.fixture(scope="session")
def tw_reference():
    from qhahn.harness import TwReference

    return TwReference(order=60)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
