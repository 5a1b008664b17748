"""Operator-valued measures on the circle, held as windows of Fourier coefficients.

``mu_hat(k) = integral of exp(-ikt) dmu(t)``, a ``coeff_dim x coeff_dim`` matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg

from woldlab.config import TolerancePolicy, resolve_policy
from woldlab.errors import InputError, NotPSD, UnsupportedMeasureKind, WindowTooSmall
from woldlab.operators import ComplexMatrix, as_complex

LOGGER = logging.getLogger(__name__)

MEASURE_KINDS = ("zero", "lebesgue", "atoms", "trig_density")


class Atom(NamedTuple):
    angle: float
    weight: ComplexMatrix


@dataclass(frozen=True, eq=False)
class OpValuedMeasure:
    """``fourier[K + k]`` holds ``mu_hat(k)`` for ``-K <= k <= K``."""

    fourier: ComplexMatrix
    kind: str = "fourier"
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        fourier = as_complex(self.fourier)
        if fourier.ndim != 3 or fourier.shape[0] % 2 != 1 or fourier.shape[1] != fourier.shape[2]:
            raise InputError(f"fourier window has invalid shape {fourier.shape}")
        object.__setattr__(self, "fourier", fourier)
        mirrored = fourier[::-1].conj().transpose(0, 2, 1)
        scale = max(1.0, float(np.max(np.abs(fourier), initial=0.0)))
        if np.max(np.abs(fourier - mirrored), initial=0.0) > 1e-10 * scale:
            raise InputError("fourier window violates mu_hat(-k) = mu_hat(k)^H")

    @classmethod
    def from_nonnegative(cls, coefficients: Sequence[npt.ArrayLike], kind: str = "fourier") -> "OpValuedMeasure":
        """Build from ``mu_hat(0..K)``; negative indices follow by symmetry."""
        blocks = [np.atleast_2d(as_complex(c)) for c in coefficients]
        if not blocks:
            raise WindowTooSmall("at least mu_hat(0) is required")
        blocks[0] = 0.5 * (blocks[0] + blocks[0].conj().T)
        negative = [b.conj().T for b in reversed(blocks[1:])]
        return cls(np.stack(negative + blocks), kind)

    @property
    def window(self) -> int:
        return (self.fourier.shape[0] - 1) // 2

    @property
    def coeff_dim(self) -> int:
        return self.fourier.shape[1]

    def coefficient(self, k: int) -> ComplexMatrix:
        if abs(k) > self.window:
            raise WindowTooSmall(f"mu_hat({k}) is outside the window {self.window}")
        return self.fourier[self.window + k]

    def truncate(self, window: int) -> "OpValuedMeasure":
        if window > self.window:
            raise WindowTooSmall(f"cannot widen window {self.window} to {window}")
        lo, hi = self.window - window, self.window + window + 1
        return OpValuedMeasure(self.fourier[lo:hi], self.kind, self.atoms)

    def toeplitz(self) -> ComplexMatrix:
        """Block Toeplitz moment matrix ``[mu_hat(j - k)]`` for ``0 <= j, k <= K``."""
        size = self.window + 1
        d = self.coeff_dim
        out = np.zeros((size * d, size * d), dtype=np.complex128)
        for j in range(size):
            for k in range(size):
                out[j * d:(j + 1) * d, k * d:(k + 1) * d] = self.coefficient(j - k)
        return out


def deviation(a: OpValuedMeasure, b: OpValuedMeasure, window: int | None = None) -> float:
    """Largest entrywise difference of ``mu_hat(k)`` over ``|k| <= window``."""
    window = min(a.window, b.window) if window is None else window
    return float(
        max(np.max(np.abs(a.coefficient(k) - b.coefficient(k))) for k in range(-window, window + 1))
    )


@dataclass(frozen=True)
class PsdCertificate:
    lambda_min: float
    lambda_max: float
    rank_tol: float

    @property
    def passed(self) -> bool:
        return self.lambda_min >= -self.rank_tol * max(self.lambda_max, 0.0)


def psd_check(mu: OpValuedMeasure, policy: TolerancePolicy | None = None) -> PsdCertificate:
    """Smallest eigenvalue of the block Toeplitz moment matrix."""
    policy = resolve_policy(policy)
    if mu.window < 1:
        raise WindowTooSmall("positivity certificate needs window >= 1")
    eigs = linalg.eigvalsh(mu.toeplitz())
    return PsdCertificate(float(eigs[0]), float(eigs[-1]), policy.rank_tol)


def _psd_weight(weight: Any, coeff_dim: int, policy: TolerancePolicy) -> ComplexMatrix:
    w = as_complex(weight)
    if w.ndim == 0:
        w = w * np.eye(coeff_dim, dtype=np.complex128)
    if w.shape != (coeff_dim, coeff_dim):
        raise InputError(f"weight has shape {w.shape}, expected ({coeff_dim}, {coeff_dim})")
    if np.max(np.abs(w - w.conj().T), initial=0.0) > policy.residual_tol:
        raise NotPSD("weight is not Hermitian")
    eigs = linalg.eigvalsh(0.5 * (w + w.conj().T))
    if eigs[0] < -policy.rank_tol * max(abs(eigs[-1]), 1.0):
        raise NotPSD(f"weight has negative eigenvalue {eigs[0]:.3e}")
    return 0.5 * (w + w.conj().T)


def make_measure(
    kind: str,
    window: int,
    coeff_dim: int = 1,
    *,
    scale: float | None = None,
    weight: Any = None,
    atoms: Sequence[tuple[float, Any]] | None = None,
    coefficients: Sequence[Any] | None = None,
    policy: TolerancePolicy | None = None,
) -> OpValuedMeasure:
    """Construct a measure window.

    ``zero``; ``lebesgue`` (``scale * I`` or PSD ``weight``); ``atoms`` as
    ``(angle, weight)`` pairs; ``trig_density`` from ``mu_hat(0..K)``,
    validated by :func:`psd_check`.
    """
    policy = resolve_policy(policy)
    if window < 0:
        raise WindowTooSmall("window must be nonnegative")
    ks = np.arange(-window, window + 1)
    d = coeff_dim
    if kind == "zero":
        return OpValuedMeasure(np.zeros((ks.size, d, d), dtype=np.complex128), "zero")
    if kind == "lebesgue":
        base = weight if weight is not None else (1.0 if scale is None else scale)
        w = _psd_weight(base, d, policy)
        fourier = np.zeros((ks.size, d, d), dtype=np.complex128)
        fourier[window] = w
        return OpValuedMeasure(fourier, "lebesgue")
    if kind == "atoms":
        if not atoms:
            raise InputError("atoms measure needs at least one atom")
        checked = tuple(Atom(float(angle), _psd_weight(w, d, policy)) for angle, w in atoms)
        phases = np.exp(-1j * np.outer(ks, [a.angle for a in checked]))
        weights = np.stack([a.weight for a in checked])
        fourier = np.einsum("ka,aij->kij", phases, weights)
        return OpValuedMeasure(fourier, "atoms", checked)
    if kind == "trig_density":
        if coefficients is None or len(coefficients) != window + 1:
            raise WindowTooSmall("trig_density needs mu_hat(0..window)")
        blocks = [c * np.eye(d) if np.ndim(c) == 0 else c for c in coefficients]
        mu = OpValuedMeasure.from_nonnegative(blocks, "trig_density")
        if window >= 1:
            certificate = psd_check(mu, policy)
            if not certificate.passed:
                raise NotPSD(f"moment matrix has eigenvalue {certificate.lambda_min:.3e}")
        return mu
    raise UnsupportedMeasureKind(f"unknown measure kind {kind!r}")


def random_atom_measure(
    rng: np.random.Generator,
    window: int,
    coeff_dim: int = 1,
    n_atoms: int | None = None,
    min_separation: float = 1e-3,
) -> OpValuedMeasure:
    """Atoms at well separated angles with random PSD weights."""
    n_atoms = n_atoms if n_atoms is not None else int(rng.integers(1, 4))
    angles: list[float] = []
    while len(angles) < n_atoms:
        candidate = float(rng.uniform(-np.pi, np.pi))
        if all(abs(np.angle(np.exp(1j * (candidate - a)))) >= min_separation for a in angles):
            angles.append(candidate)
    atoms = []
    for angle in angles:
        factor = rng.normal(size=(coeff_dim, coeff_dim)) + 1j * rng.normal(size=(coeff_dim, coeff_dim))
        atoms.append((angle, factor @ factor.conj().T / coeff_dim))
    return make_measure("atoms", window, coeff_dim, atoms=atoms)


def parse_measure(text: str, window: int, coeff_dim: int = 1) -> OpValuedMeasure:
    """``zero``, ``lebesgue[:scale]`` or ``atom:angle[:weight]`` (weights times I)."""
    kind, *args = text.strip().split(":")
    try:
        values = [float(a) for a in args]
    except ValueError as exc:
        raise InputError(f"measure {text!r} has non-numeric arguments") from exc
    if kind == "zero" and not values:
        return make_measure("zero", window, coeff_dim)
    if kind == "lebesgue" and len(values) <= 1:
        return make_measure("lebesgue", window, coeff_dim, scale=values[0] if values else 1.0)
    if kind == "atom" and 1 <= len(values) <= 2:
        weight = values[1] if len(values) == 2 else 1.0
        return make_measure("atoms", window, coeff_dim, atoms=[(values[0], weight)])
    raise UnsupportedMeasureKind(f"cannot parse measure {text!r}")
