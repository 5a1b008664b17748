import pytest
from pydantic import ValidationError

from woldlab.config import ENV_RESIDUAL_TOL, TolerancePolicy, resolve_policy


def test_defaults():
    policy = TolerancePolicy()
    assert policy.rank_tol == 1e-10
    assert policy.residual_tol == 1e-8
    assert policy.max_iter == 100


def test_environment_overrides_residual_tol(monkeypatch):
    monkeypatch.setenv(ENV_RESIDUAL_TOL, "1e-6")
    assert TolerancePolicy.from_env().residual_tol == 1e-6


def test_explicit_override_beats_environment(monkeypatch):
    monkeypatch.setenv(ENV_RESIDUAL_TOL, "1e-6")
    policy = TolerancePolicy.from_env(residual_tol=1e-4, rank_tol=None)
    assert policy.residual_tol == 1e-4
    assert policy.rank_tol == 1e-10


def test_garbage_environment_is_ignored(monkeypatch):
    monkeypatch.setenv(ENV_RESIDUAL_TOL, "tight")
    assert TolerancePolicy.from_env().residual_tol == 1e-8


@pytest.mark.parametrize("field,value", [("rank_tol", 0.0), ("residual_tol", -1.0), ("max_iter", 0)])
def test_rejects_invalid_values(field, value):
    with pytest.raises(ValidationError):
        TolerancePolicy(**{field: value})


def test_policy_is_frozen():
    policy = TolerancePolicy()
    with pytest.raises(ValidationError):
        policy.rank_tol = 1.0


def test_resolve_policy_passes_through():
    policy = TolerancePolicy(max_iter=7)
    assert resolve_policy(policy) is policy
    assert resolve_policy(None) == TolerancePolicy()
