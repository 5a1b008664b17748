"""Independent reference computations for the decomposition and model code.

Nothing here imports the modules being cross-checked: operators are read
through their ``matrix`` and ``domain.gram`` attributes and measures through
``kind``, ``fourier`` and ``atoms``. Ranks are taken by exact Gaussian
elimination over the Gaussian rationals.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
from sympy import I, Rational
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from woldlab.errors import InputError, UnsupportedMeasureKind

LOGGER = logging.getLogger(__name__)

MAX_ORACLE_DIM = 64
MAX_DENOMINATOR = 10**12


def _exact(x: float) -> Rational:
    frac = Fraction(float(x)).limit_denominator(MAX_DENOMINATOR)
    return Rational(frac.numerator, frac.denominator)


def _domain_matrix(a: npt.NDArray[np.complex128]) -> DomainMatrix:
    rows = [[QQ_I.from_sympy(_exact(z.real) + I * _exact(z.imag)) for z in row] for row in a]
    return DomainMatrix(rows, a.shape, QQ_I)


def _rank(m: DomainMatrix) -> int:
    return 0 if 0 in m.shape else m.rank()


def brute_force_wold_oracle(T: Any) -> tuple[int, int]:
    """``(dim H_inf, dim W_T(ker T*))`` by exact elimination.

    ``H_inf`` is the range of ``T^k`` once its rank stops dropping;
    ``ker T* = ker(T^H G)``; the wandering span is the Krylov span of that
    kernel under ``T``, grown until its rank stops increasing.
    It sees the stored matrix alone and applies no truncation bound.
    """
    matrix = np.asarray(T.matrix, dtype=np.complex128)
    gram = np.asarray(T.domain.gram, dtype=np.complex128)
    dim = matrix.shape[0]
    if dim > MAX_ORACLE_DIM:
        raise InputError(f"oracle is limited to dimension {MAX_ORACLE_DIM}, got {dim}")
    t = _domain_matrix(matrix)

    power = t
    rank = _rank(power)
    previous = dim
    while rank < previous:
        previous = rank
        power = power.matmul(t)
        rank = _rank(power)
    h_inf = rank

    co = _domain_matrix(matrix.conj().T).matmul(_domain_matrix(gram))
    null = co.nullspace()
    if null.shape[0] == 0:
        return h_inf, 0
    block = null.transpose()
    krylov = block
    span = _rank(krylov)
    while True:
        block = t.matmul(block)
        grown = krylov.hstack(block)
        grown_rank = _rank(grown)
        if grown_rank == span:
            break
        krylov, span = grown, grown_rank
    LOGGER.debug("oracle dims (%d, %d) at dim %d", h_inf, span, dim)
    return h_inf, span


def _scalar_coefficients(f: Sequence[complex]) -> npt.NDArray[np.complex128]:
    a = np.asarray(f, dtype=np.complex128).ravel()
    if a.size == 0:
        raise InputError("polynomial needs at least one coefficient")
    return a


def _scalar_measure(mu: Any) -> tuple[str, Any]:
    fourier = np.asarray(mu.fourier)
    if fourier.shape[1:] != (1, 1):
        raise UnsupportedMeasureKind("closed forms exist only for scalar measures")
    return mu.kind, fourier


def local_dirichlet_integral(f: Sequence[complex], angle: float) -> float:
    """``|| (f - f(zeta)) / (z - zeta) ||^2`` in ``H^2`` with ``zeta = exp(i angle)``."""
    a = _scalar_coefficients(f)
    zeta = np.exp(1j * angle)
    shifted = a.copy()
    shifted[0] -= np.polynomial.polynomial.polyval(zeta, a)
    quotient, remainder = np.polynomial.polynomial.polydiv(shifted, np.array([-zeta, 1.0]))
    LOGGER.debug("division remainder %.3e", float(np.max(np.abs(remainder))))
    return float(np.sum(np.abs(quotient) ** 2))


def _atom_double_sum(a: npt.NDArray[np.complex128], angle: float) -> float:
    m = np.arange(a.size)
    low = np.minimum.outer(m, m)
    phase = np.exp(1j * np.subtract.outer(m, m) * angle)
    return float(np.real(np.sum(low * phase * np.outer(a, a.conj()))))


def dirichlet_integral_oracle(f: Sequence[complex], mu: Any) -> float:
    """``||f||^2`` in the one-variable ``D(mu)`` for ``f = sum a_m z^m``."""
    a = _scalar_coefficients(f)
    kind, fourier = _scalar_measure(mu)
    hardy = float(np.sum(np.abs(a) ** 2))
    if kind == "zero":
        return hardy
    if kind == "lebesgue":
        scale = float(np.real(fourier[(fourier.shape[0] - 1) // 2, 0, 0]))
        return hardy + scale * float(np.sum(np.arange(a.size) * np.abs(a) ** 2))
    if kind == "atoms" and len(mu.atoms) == 1:
        angle, weight = mu.atoms[0]
        return hardy + float(np.real(np.asarray(weight).ravel()[0])) * _atom_double_sum(a, angle)
    raise UnsupportedMeasureKind(f"no closed form for measure kind {kind!r}")
