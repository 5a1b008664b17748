"""Exception hierarchy for woldlab.

Every error carries the CLI exit code it maps to: 2 for a mathematical check
that failed, 3 for unusable input, 4 for an internal numerical failure.
"""
from __future__ import annotations

from typing import Any


class WoldLabError(Exception):
    """Base class of all woldlab errors."""

    exit_code = 4


class InputError(WoldLabError):
    """The input cannot be used as given."""

    exit_code = 3


class CheckFailed(WoldLabError):
    """A mathematical precondition does not hold for the input."""

    exit_code = 2


class NumericalFailure(WoldLabError):
    """An algorithm did not converge or hit a singular system."""

    exit_code = 4


class SchemaError(InputError):
    def __init__(self, message: str, pointer: str = "") -> None:
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class UnknownExample(InputError):
    pass


class NotPSD(InputError):
    pass


class WindowTooSmall(InputError):
    pass


class UnsupportedMeasureKind(InputError):
    pass


class PointOutsideDisc(InputError):
    pass


class NotNested(InputError):
    pass


class CapTooSmall(InputError):
    pass


class NotLeftInvertible(CheckFailed):
    pass


class NonCommuting(CheckFailed):
    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report


class PrerequisiteFailed(CheckFailed):
    """Raised with the sub-report whose verdict blocked the computation."""

    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report


class EmptyWanderingSubspace(CheckFailed):
    pass


class DictionaryRankDeficient(CheckFailed):
    pass


class GramNotPSD(CheckFailed):
    pass


class NoStabilization(NumericalFailure):
    def __init__(self, max_iter: int) -> None:
        super().__init__(f"dimension still decreasing after {max_iter} iterations")
        self.max_iter = max_iter


class GramSingular(NumericalFailure):
    pass
