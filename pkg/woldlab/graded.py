"""Truncated graded monomial spaces and the degree-shifting operators on them.

Basis order is graded lexicographic: by total degree ``m + n``, then by
decreasing power of ``z1`` (so degree one lists ``z1`` before ``z2``), then by
coefficient index. One-variable spaces use the monomials ``(m, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from woldlab.errors import CapTooSmall, InputError
from woldlab.operators import ComplexMatrix, DenseOperator, InnerProductSpace


class GradedIndex(NamedTuple):
    m: int
    n: int

    @property
    def degree(self) -> int:
        return self.m + self.n


def graded_indices(cap: int, nvars: int = 2) -> tuple[GradedIndex, ...]:
    if cap < 0:
        raise InputError("cap must be nonnegative")
    if nvars == 1:
        return tuple(GradedIndex(m, 0) for m in range(cap + 1))
    if nvars != 2:
        raise InputError(f"nvars must be 1 or 2, got {nvars}")
    return tuple(GradedIndex(m, d - m) for d in range(cap + 1) for m in range(d, -1, -1))


@dataclass(frozen=True, eq=False)
class GradedSpace(InnerProductSpace):
    """Polynomials of total degree at most ``cap`` with coefficients in ``C^coeff_dim``."""

    cap: int = 0
    coeff_dim: int = 1
    nvars: int = 2

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.coeff_dim < 1:
            raise InputError("coeff_dim must be positive")
        expected = len(graded_indices(self.cap, self.nvars)) * self.coeff_dim
        if self.dim != expected:
            raise InputError(f"gram has dimension {self.dim}, basis has {expected}")
        headroom = np.repeat([float(self.cap - idx.degree) for idx in self.indices], self.coeff_dim)
        object.__setattr__(self, "headroom", headroom)

    @classmethod
    def hardy(cls, cap: int, coeff_dim: int = 1, nvars: int = 2) -> "GradedSpace":
        dim = len(graded_indices(cap, nvars)) * coeff_dim
        return cls(np.eye(dim, dtype=np.complex128), cap=cap, coeff_dim=coeff_dim, nvars=nvars)

    @cached_property
    def indices(self) -> tuple[GradedIndex, ...]:
        return graded_indices(self.cap, self.nvars)

    @cached_property
    def basis(self) -> tuple[tuple[int, int, int], ...]:
        return tuple((idx.m, idx.n, i) for idx in self.indices for i in range(self.coeff_dim))

    @cached_property
    def _positions(self) -> dict[GradedIndex, int]:
        return {idx: k for k, idx in enumerate(self.indices)}

    def position(self, index: tuple[int, int], coeff: int = 0) -> int:
        return self._positions[GradedIndex(*index)] * self.coeff_dim + coeff

    def contains(self, index: tuple[int, int]) -> bool:
        return GradedIndex(*index) in self._positions

    def degree_mask(self, degree: int) -> npt.NDArray[np.bool_]:
        return np.repeat([idx.degree == degree for idx in self.indices], self.coeff_dim)

    def degree_zero_frame(self) -> ComplexMatrix:
        """Orthonormal frame of the constants, ``E`` of the model pair."""
        return self.coordinate_frame(self.degree_mask(0))

    def monomial_row(self, point: tuple[complex, ...]) -> ComplexMatrix:
        """``Phi(z)``: coeff_dim x dim evaluation of every basis vector at ``point``."""
        z1 = complex(point[0])
        z2 = complex(point[1]) if self.nvars == 2 else 0.0
        values = np.array([z1**idx.m * z2**idx.n for idx in self.indices])
        return np.kron(values[np.newaxis, :], np.eye(self.coeff_dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class GradedOperator(DenseOperator):
    """Multiplication by ``z1^a z2^b`` on a graded space, honest below the cap."""

    shift: GradedIndex = GradedIndex(1, 0)

    @property
    def graded_space(self) -> GradedSpace:
        assert isinstance(self.domain, GradedSpace)
        return self.domain


def shift_operator(space: GradedSpace, shift: tuple[int, int] = (1, 0)) -> GradedOperator:
    step = GradedIndex(*shift)
    if space.nvars == 1 and step.n:
        raise InputError("one-variable spaces only shift in z1")
    if step.degree < 1:
        raise InputError("shift must raise the degree")
    if space.cap < step.degree:
        raise CapTooSmall(f"cap {space.cap} leaves no admissible domain for shift {tuple(step)}")
    matrix = np.zeros((space.dim, space.dim), dtype=np.complex128)
    window = np.zeros(space.dim, dtype=bool)
    for idx in space.indices:
        target = (idx.m + step.m, idx.n + step.n)
        if not space.contains(target):
            continue
        for i in range(space.coeff_dim):
            src = space.position(idx, i)
            matrix[space.position(target, i), src] = 1.0
            window[src] = True
    return GradedOperator(matrix, space, space, window, step)
