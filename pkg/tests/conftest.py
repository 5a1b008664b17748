import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from woldlab.config import ENV_RESIDUAL_TOL, TolerancePolicy
from woldlab.gallery import make_example

settings.register_profile(
    "woldlab",
    derandomize=True,
    deadline=None,
    max_examples=20,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("woldlab")


@pytest.fixture(autouse=True)
def _no_tolerance_env(monkeypatch):
    monkeypatch.delenv(ENV_RESIDUAL_TOL, raising=False)


@pytest.fixture
def policy():
    return TolerancePolicy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def example():
    """Factory for gallery examples with optional parameter overrides."""
    from woldlab.gallery import ExampleSpec

    def build(name, **params):
        return make_example(ExampleSpec(name=name, params=params))

    return build

