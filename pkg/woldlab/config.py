"""Tolerance configuration shared by every numerical routine."""
from __future__ import annotations

import logging
import os
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

LOGGER = logging.getLogger(__name__)

ENV_RESIDUAL_TOL = "WOLDLAB_TOL"
DEFAULT_RANK_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_MAX_ITER = 100


class TolerancePolicy(BaseModel):
    """Rank cutoff, identity pass threshold and stabilization cap."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rank_tol: float = Field(DEFAULT_RANK_TOL, gt=0)
    residual_tol: float = Field(DEFAULT_RESIDUAL_TOL, gt=0)
    max_iter: int = Field(DEFAULT_MAX_ITER, ge=1)

    @classmethod
    def from_env(cls, **overrides: Any) -> "TolerancePolicy":
        """Defaults, then ``WOLDLAB_TOL``, then explicit non-None overrides."""
        values: dict[str, Any] = {}
        raw = os.environ.get(ENV_RESIDUAL_TOL)
        if raw:
            try:
                values["residual_tol"] = float(raw)
            except ValueError:
                LOGGER.warning("ignoring non-numeric %s=%r", ENV_RESIDUAL_TOL, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def resolve_policy(policy: TolerancePolicy | None) -> TolerancePolicy:
    return policy if policy is not None else TolerancePolicy.from_env()
