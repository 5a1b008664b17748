"""Dirichlet-type model spaces ``D_E(mu1, mu2)`` at finite degree cap.

Gram entries follow the monomial inner product formula: for basis
``z1^m z2^n x`` (column) against ``z1^p z2^q y`` (row) the block is

* zero when ``m != p`` and ``n != q``;
* ``(n ^ q) mu2_hat(q - n)`` when ``m == p``, ``n != q``;
* ``(m ^ p) mu1_hat(p - m)`` when ``m != p``, ``n == q``;
* ``I + m mu1_hat(0) + n mu2_hat(0)`` on the diagonal.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from woldlab.config import TolerancePolicy, resolve_policy
from woldlab.errors import (
    CapTooSmall,
    DictionaryRankDeficient,
    EmptyWanderingSubspace,
    GramNotPSD,
    InputError,
    PointOutsideDisc,
    PrerequisiteFailed,
    WindowTooSmall,
)
from woldlab.graded import GradedOperator, GradedSpace, graded_indices, shift_operator
from woldlab.measures import OpValuedMeasure, make_measure
from woldlab.operators import (
    ComplexMatrix,
    DenseOperator,
    cauchy_dual,
    check_left_inverse_commuting,
    check_toral_two_isometry,
    check_two_isometry,
)
from woldlab.subspaces import Subspace, intersect, wandering_kernel

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    mu1: OpValuedMeasure
    mu2: OpValuedMeasure
    cap: int
    nvars: int = 2

    def __post_init__(self) -> None:
        if self.mu1.coeff_dim != self.mu2.coeff_dim:
            raise InputError("measures act on coefficient spaces of different dimension")
        if self.cap < 0:
            raise InputError("cap must be nonnegative")
        needed = max(self.cap - 1, 0)
        for name, mu in (("mu1", self.mu1), ("mu2", self.mu2)):
            if self.nvars == 1 and name == "mu2":
                continue
            if mu.window < needed:
                raise WindowTooSmall(f"{name} window {mu.window} below cap - 1 = {needed}")

    @property
    def coeff_dim(self) -> int:
        return self.mu1.coeff_dim


def assemble_gram(spec: ModelSpec) -> ComplexMatrix:
    """Raw Gram matrix, without positivity validation."""
    d = spec.coeff_dim
    indices = graded_indices(spec.cap, spec.nvars)
    eye = np.eye(d, dtype=np.complex128)
    gram = np.zeros((len(indices) * d, len(indices) * d), dtype=np.complex128)
    for r, (p, q) in enumerate(indices):
        for c, (m, n) in enumerate(indices):
            if m == p and n == q:
                block = eye + m * spec.mu1.coefficient(0) + (n * spec.mu2.coefficient(0) if n else 0)
            elif m == p:
                block = min(n, q) * spec.mu2.coefficient(q - n) if min(n, q) else 0
            elif n == q:
                block = min(m, p) * spec.mu1.coefficient(p - m) if min(m, p) else 0
            else:
                continue
            gram[r * d:(r + 1) * d, c * d:(c + 1) * d] = block
    return gram


def gram_matrix(spec: ModelSpec, policy: TolerancePolicy | None = None) -> GradedSpace:
    """The truncated model space; raises GramNotPSD for inconsistent measures."""
    policy = resolve_policy(policy)
    gram = assemble_gram(spec)
    eigs = linalg.eigvalsh(gram)
    if eigs[0] <= policy.rank_tol * max(eigs[-1], 0.0):
        raise GramNotPSD(f"model gram has eigenvalue {eigs[0]:.3e} at cap {spec.cap}")
    return GradedSpace(gram, cap=spec.cap, coeff_dim=spec.coeff_dim, nvars=spec.nvars)


def model_space(
    mu1: OpValuedMeasure,
    mu2: OpValuedMeasure | None,
    cap: int,
    policy: TolerancePolicy | None = None,
) -> GradedSpace:
    """Bidisc space, or the one-variable ``D(mu1)`` when ``mu2`` is None."""
    if mu2 is None:
        zero = make_measure("zero", mu1.window, mu1.coeff_dim)
        return gram_matrix(ModelSpec(mu1, zero, cap, nvars=1), policy)
    return gram_matrix(ModelSpec(mu1, mu2, cap), policy)


def mz_operators(space: GradedSpace) -> tuple[GradedOperator, GradedOperator]:
    """``(M_z1, M_z2)``; each is honest on degrees ``<= cap - 1``."""
    if space.nvars != 2:
        raise InputError("coordinate pair needs a two-variable space")
    return shift_operator(space, (1, 0)), shift_operator(space, (0, 1))


def _check_point(point: Sequence[complex], space: GradedSpace) -> tuple[complex, ...]:
    point = tuple(complex(p) for p in np.atleast_1d(point))
    if len(point) != space.nvars:
        raise InputError(f"point needs {space.nvars} coordinates")
    if any(abs(p) >= 1.0 for p in point):
        raise PointOutsideDisc(f"{point} is not in the open polydisc")
    return point


def kernel_vector(space: GradedSpace, w: Sequence[complex]) -> ComplexMatrix:
    """Coefficients of ``K_N(., w) v`` for ``v`` running over the basis of ``E``."""
    row = space.monomial_row(_check_point(w, space))
    return linalg.cho_solve((space.cholesky, True), row.conj().T)


def kernel_eval(space: GradedSpace, z: Sequence[complex], w: Sequence[complex]) -> ComplexMatrix:
    """Truncated reproducing kernel ``K_N(z, w) = Phi(z) G^-1 Phi(w)^H``."""
    return space.monomial_row(_check_point(z, space)) @ kernel_vector(space, w)


def reproducing_residual(space: GradedSpace, coeffs: ComplexMatrix, w: Sequence[complex]) -> float:
    """``max |<p, K(., w) v> - <p(w), v>|`` over basis vectors ``v`` of ``E``."""
    coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(space.dim, -1)
    pairing = space.inner(coeffs, kernel_vector(space, w))
    value = space.monomial_row(_check_point(w, space)) @ coeffs
    return float(np.max(np.abs(pairing - value)))


def recover_measure(
    T: DenseOperator,
    E: Subspace,
    window: int,
    policy: TolerancePolicy | None = None,
    check: bool = True,
) -> OpValuedMeasure:
    """Read off ``mu_hat(k) = P_E T*^k (T*T - I)|_E`` for ``0 <= k <= window``.

    Entry ``[j, i]`` is ``<T e_i, T^(k+1) e_j> - <e_i, T^k e_j>``, so only forms
    of honest powers enter.
    """
    policy = resolve_policy(policy)
    if window < 0:
        raise WindowTooSmall("window must be nonnegative")
    if check:
        residual = check_two_isometry(T, policy)
        if residual >= policy.residual_tol:
            raise PrerequisiteFailed(f"operator is not 2-isometric (residual {residual:.3e})", residual)
    if window + 1 > E.headroom():
        raise CapTooSmall(f"window {window} needs headroom {window + 1}, subspace has {E.headroom()}")
    space = T.space
    frame = E.frame
    once = T @ frame
    power = frame
    coefficients = []
    for k in range(window + 1):
        ahead = T @ power
        coefficients.append(space.inner(once, ahead) - space.inner(frame, power))
        power = ahead
    return OpValuedMeasure.from_nonnegative(coefficients, "recovered")


def monomial_dictionary(Ts: Sequence[DenseOperator], frame: ComplexMatrix, cap: int) -> ComplexMatrix:
    """Columns ``T1^m T2^n e_i`` in graded-lex order (one operator: ``T^m e_i``)."""
    nvars = len(Ts)
    blocks = {}
    for idx in graded_indices(cap, nvars):
        if idx.m == 0 and idx.n == 0:
            blocks[idx] = frame
        elif idx.m == 0:
            blocks[idx] = Ts[1] @ blocks[(0, idx.n - 1)]
        else:
            blocks[idx] = Ts[0] @ blocks[(idx.m - 1, idx.n)]
    return np.hstack([blocks[idx] for idx in graded_indices(cap, nvars)])


def separation_residual(gram: ComplexMatrix, cap: int, coeff_dim: int) -> float:
    """Largest ``|<T1^m x, T1^p T2^q y>|`` with ``q >= 1`` and its mirror."""
    indices = graded_indices(cap, 2)
    d = coeff_dim
    worst = 0.0
    for r, (p, q) in enumerate(indices):
        for c, (m, n) in enumerate(indices):
            if (n == 0 and q >= 1) or (m == 0 and p >= 1):
                block = gram[r * d:(r + 1) * d, c * d:(c + 1) * d]
                worst = max(worst, float(np.max(np.abs(block))))
    return worst


@dataclass(frozen=True)
class EquivalenceReport:
    recovered_mu1: OpValuedMeasure
    recovered_mu2: OpValuedMeasure
    gram_residual: float
    intertwining_residual: float
    separation_residual: float
    lic_residual: float
    toral_residual: float
    dictionary_min_eigenvalue: float
    cap: int
    coeff_dim: int
    prerequisites_passed: bool
    dictionary_full_rank: bool
    residual_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.prerequisites_passed
            and self.dictionary_full_rank
            and self.gram_residual < self.residual_tol
            and self.intertwining_residual < self.residual_tol
        )


def verify_model_equivalence(
    T1: DenseOperator,
    T2: DenseOperator,
    E: Subspace | None = None,
    cap: int | None = None,
    policy: TolerancePolicy | None = None,
    force: bool = False,
) -> EquivalenceReport:
    """Compare the pair against ``(M_z1, M_z2)`` on the recovered model space.

    With ``force`` the residuals are computed even when the prerequisites
    fail, and the report is marked as failing instead of raising.
    """
    policy = resolve_policy(policy)
    space = T1.space
    if E is None:
        E = intersect(wandering_kernel(T1, policy), wandering_kernel(T2, policy))
    if E.is_zero:
        raise EmptyWanderingSubspace("ker T1* and ker T2* intersect trivially")
    if cap is None:
        headroom = E.headroom()
        if not np.isfinite(headroom):
            raise CapTooSmall("a cap is required on spaces without a degree grading")
        cap = int(headroom)
    if cap < 1:
        raise CapTooSmall("model verification needs cap >= 1")
    lic = check_left_inverse_commuting([T1, T2], policy)
    toral = check_toral_two_isometry(T1, T2, policy)
    prerequisites = lic.passed and toral.passed
    if not prerequisites:
        LOGGER.warning("model prerequisites failed: lic %.3e, toral %.3e", lic.lic_residual, toral.residual)
        if not force:
            raise PrerequisiteFailed("pair is not a left-inverse commuting toral 2-isometry", (lic, toral))
    mu1 = recover_measure(T1, E, cap - 1, policy, check=False)
    mu2 = recover_measure(T2, E, cap - 1, policy, check=False)
    model = assemble_gram(ModelSpec(mu1, mu2, cap))
    columns = monomial_dictionary([T1, T2], E.frame, cap)
    candidate = space.inner(columns, columns)
    eigs = linalg.eigvalsh(0.5 * (candidate + candidate.conj().T))
    full_rank = bool(eigs[0] > policy.rank_tol * max(eigs[-1], 0.0))
    if not full_rank and not force:
        raise DictionaryRankDeficient(f"dictionary gram has eigenvalue {eigs[0]:.3e}")
    d = E.dim
    intertwining = 0.0
    for idx in graded_indices(cap - 1, 2):
        for T, step in ((T1, (1, 0)), (T2, (0, 1))):
            src = _block(columns, cap, idx, d)
            dst = _block(columns, cap, (idx.m + step[0], idx.n + step[1]), d)
            intertwining = max(intertwining, space.norm(T @ src - dst))
    report = EquivalenceReport(
        recovered_mu1=mu1,
        recovered_mu2=mu2,
        gram_residual=float(np.max(np.abs(candidate - model))),
        intertwining_residual=intertwining,
        separation_residual=separation_residual(candidate, cap, d),
        lic_residual=lic.lic_residual,
        toral_residual=toral.residual,
        dictionary_min_eigenvalue=float(eigs[0]),
        cap=cap,
        coeff_dim=d,
        prerequisites_passed=prerequisites,
        dictionary_full_rank=full_rank,
        residual_tol=policy.residual_tol,
    )
    LOGGER.info("model verification gram residual %.3e, passed=%s", report.gram_residual, report.passed)
    return report


def _block(columns: ComplexMatrix, cap: int, index: tuple[int, int], d: int) -> ComplexMatrix:
    position = graded_indices(cap, 2).index(index)
    return columns[:, position * d:(position + 1) * d]


def one_variable_gram_residual(
    T: DenseOperator, E: Subspace, mu: OpValuedMeasure, cap: int
) -> float:
    """Deviation of ``[<T^n e_i, T^q e_j>]`` from the one-variable ``D(mu)`` Gram."""
    zero = make_measure("zero", mu.window, mu.coeff_dim)
    model = assemble_gram(ModelSpec(mu, zero, cap, nvars=1))
    columns = monomial_dictionary([T], E.frame, cap)
    return float(np.max(np.abs(T.space.inner(columns, columns) - model)))


def cauchy_dual_defect(mu: OpValuedMeasure, caps: Sequence[int]) -> list[float]:
    """Change of the low-degree coefficients of ``T' 1`` between successive caps."""
    if len(caps) < 2 or min(caps) < 2:
        raise CapTooSmall("need at least two caps, each >= 2")
    shared = min(caps)
    vectors = []
    for cap in caps:
        space = model_space(mu, None, cap)
        dual = cauchy_dual(shift_operator(space))
        vectors.append(dual.matrix[:shared, 0])
    return [float(np.linalg.norm(a - b)) for a, b in zip(vectors, vectors[1:])]
