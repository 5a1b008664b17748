"""Hyper-ranges, wandering spans and the Wold-type decompositions.

Piece labels follow the convention ``alpha_i = 0`` for a unitary direction
and ``alpha_i = 1`` for a shift direction, so for pairs ``H00`` is the jointly
unitary part and ``H11`` the doubly shift part.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from woldlab.config import TolerancePolicy, resolve_policy
from woldlab.dirichlet import (
    EquivalenceReport,
    one_variable_gram_residual,
    recover_measure,
    verify_model_equivalence,
)
from woldlab.errors import NoStabilization, PrerequisiteFailed
from woldlab.measures import OpValuedMeasure
from woldlab.operators import (
    DenseOperator,
    LicReport,
    cauchy_dual,
    check_left_inverse_commuting,
    check_two_isometry,
    left_inverse,
    op_norm,
)
from woldlab.subspaces import (
    Subspace,
    apply,
    column_span,
    complement,
    cross_gram_norm,
    distance,
    intersect,
    invariance_report,
    join,
    wandering_kernel,
)

LOGGER = logging.getLogger(__name__)

Alpha = tuple[int, ...]


@dataclass(frozen=True)
class Stabilized:
    subspace: Subspace
    iterations: int
    truncation_limited: bool = False


def _truncation_limited(T: DenseOperator, iterations: int) -> bool:
    if not T.truncated or T.domain.headroom is None:
        return False
    finite = T.domain.headroom[np.isfinite(T.domain.headroom)]
    return bool(finite.size) and bool(iterations > finite.max())


def analytic_bound(T: DenseOperator, policy: TolerancePolicy | None = None) -> Subspace:
    """``W_{T'}(E_T)^perp``; it contains ``H_inf(T)`` since ``ran T^m`` is orthogonal to ``T'^k E_T`` for ``k < m``."""
    policy = resolve_policy(policy)
    generated = wandering_span(cauchy_dual(T, policy), wandering_kernel(T, policy), policy).subspace
    return complement(generated)


def hyper_range(T: DenseOperator, policy: TolerancePolicy | None = None) -> Stabilized:
    """Intersection of the ranges of ``T^m``, stabilized by dimension.

    Zeroed columns at the cap can leave a spurious invertible block when ``T``
    mixes degrees (the dual of an atom-measure shift does), so on truncated
    operators the result is also cut down by :func:`analytic_bound`.
    """
    policy = resolve_policy(policy)
    space = T.space
    norm = T.norm()
    current = Subspace.full(space, policy)
    power = np.eye(space.dim, dtype=np.complex128)
    for m in range(1, policy.max_iter + 1):
        power = T @ power
        step = intersect(current, column_span(power, space, policy, scale=norm**m))
        if step.dim == current.dim:
            if T.truncated and not current.is_zero:
                current = intersect(current, analytic_bound(T, policy))
            LOGGER.debug("hyper-range stabilized at dim %d after %d iterations", current.dim, m)
            return Stabilized(current, m, _truncation_limited(T, m))
        current = step
    raise NoStabilization(policy.max_iter)


def directional_core(T: DenseOperator, s: Subspace) -> Stabilized:
    """``S`` intersected with ``T^k(S)`` for all ``k >= 1``."""
    policy = s.tol
    current = s
    for k in range(1, policy.max_iter + 1):
        if current.is_zero:
            return Stabilized(current, k)
        step = intersect(current, apply(T, s, k))
        if step.dim == current.dim:
            return Stabilized(current, k)
        current = step
    raise NoStabilization(policy.max_iter)


def wandering_span(T: DenseOperator, s: Subspace, policy: TolerancePolicy | None = None) -> Stabilized:
    """Join of ``T^m(S)`` over ``m >= 0``; stops once an image adds nothing."""
    policy = resolve_policy(policy) if policy is not None else s.tol
    current = s
    image = s
    for m in range(1, policy.max_iter + 1):
        image = apply(T, image)
        step = join(current, image)
        if step.dim == current.dim:
            return Stabilized(current, m)
        current = step
    LOGGER.warning("wandering span still growing after %d steps", policy.max_iter)
    return Stabilized(current, policy.max_iter)


def unitary_defect(T: DenseOperator, s: Subspace) -> float:
    """How far ``T`` restricted to ``S`` is from a unitary of ``S``."""
    if s.is_zero:
        return 0.0
    image = T @ s.frame
    compressed = s.space.inner(image, s.frame)
    leak = s.space.norm(image - s.frame @ compressed)
    eye = np.eye(s.dim)
    iso = np.linalg.norm(compressed.conj().T @ compressed - eye, 2)
    co_iso = np.linalg.norm(compressed @ compressed.conj().T - eye, 2)
    return float(max(leak, iso, co_iso))


def _completeness(pieces: Sequence[Subspace]) -> float:
    space = pieces[0].space
    total = sum((p.projection() for p in pieces), np.zeros((space.dim, space.dim), dtype=np.complex128))
    return op_norm(total - np.eye(space.dim), space, space)


@dataclass(frozen=True)
class WoldReport:
    h_inf: Subspace
    wandering: Subspace
    completeness_residual: float
    orthogonality_residual: float
    unitary_residual: float
    reducing_residual: float
    iterations_to_stabilize: int
    truncation_limited: bool
    residual_tol: float

    @property
    def residuals(self) -> dict[str, float]:
        return {
            "completeness": self.completeness_residual,
            "orthogonality": self.orthogonality_residual,
            "unitary": self.unitary_residual,
            "reducing": self.reducing_residual,
        }

    @property
    def passed(self) -> bool:
        return all(value < self.residual_tol for value in self.residuals.values())

    @property
    def dims(self) -> tuple[int, int]:
        return self.h_inf.dim, self.wandering.dim


def wold_single(T: DenseOperator, policy: TolerancePolicy | None = None) -> WoldReport:
    """Test ``H = H_inf(T) (+) W_T(E_T)``; a failed hypothesis is a failing report."""
    policy = resolve_policy(policy)
    left_inverse(T, policy)
    stable = hyper_range(T, policy)
    h_inf = stable.subspace
    wandering = wandering_span(T, wandering_kernel(T, policy), policy).subspace
    report = WoldReport(
        h_inf=h_inf,
        wandering=wandering,
        completeness_residual=_completeness([h_inf, wandering]),
        orthogonality_residual=cross_gram_norm(h_inf, wandering),
        unitary_residual=unitary_defect(T, h_inf),
        reducing_residual=invariance_report(T, h_inf).reducing,
        iterations_to_stabilize=stable.iterations,
        truncation_limited=stable.truncation_limited,
        residual_tol=policy.residual_tol,
    )
    LOGGER.info("wold decomposition dims %s, passed=%s", report.dims, report.passed)
    return report


def joint_core(Ts: Sequence[DenseOperator], s: Subspace) -> Subspace:
    """Alternating directional cores until a full sweep keeps the dimension."""
    current = s
    if not Ts:
        return current
    for T in Ts:
        if T.truncated and not current.is_zero:
            current = intersect(current, analytic_bound(T, s.tol))
    for _ in range(s.tol.max_iter):
        before = current.dim
        for T in Ts:
            current = directional_core(T, current).subspace
        if current.dim == before:
            return current
    raise NoStabilization(s.tol.max_iter)


def joint_span(Ts: Sequence[DenseOperator], s: Subspace) -> Subspace:
    current = s
    if not Ts:
        return current
    for _ in range(s.tol.max_iter):
        before = current.dim
        for T in Ts:
            current = wandering_span(T, current).subspace
        if current.dim == before:
            return current
    raise NoStabilization(s.tol.max_iter)


@dataclass(frozen=True)
class TuplePiece:
    alpha: Alpha
    subspace: Subspace
    unitary_residuals: tuple[float, ...]
    reducing_residuals: tuple[float, ...]

    @property
    def label(self) -> str:
        return "".join(str(bit) for bit in self.alpha)

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def passed(self, tol: float) -> bool:
        unitary_ok = all(
            value < tol for bit, value in zip(self.alpha, self.unitary_residuals) if bit == 0
        )
        return unitary_ok and all(value < tol for value in self.reducing_residuals)


@dataclass(frozen=True)
class TupleWoldReport:
    pieces: dict[Alpha, TuplePiece]
    completeness_residual: float
    orthogonality_residual: float
    residual_tol: float
    prerequisites: LicReport | None = None
    singles: tuple[WoldReport, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return (
            self.completeness_residual < self.residual_tol
            and self.orthogonality_residual < self.residual_tol
            and all(piece.passed(self.residual_tol) for piece in self.pieces.values())
        )

    @property
    def dims(self) -> dict[str, int]:
        return {piece.label: piece.dim for piece in self.pieces.values()}


def _tuple_prerequisites(
    Ts: Sequence[DenseOperator], policy: TolerancePolicy, force: bool
) -> tuple[LicReport | None, tuple[WoldReport, ...]]:
    lic = check_left_inverse_commuting(Ts, policy) if len(Ts) > 1 else None
    singles = tuple(wold_single(T, policy) for T in Ts)
    ok = (lic is None or lic.passed) and all(single.passed for single in singles)
    if not ok:
        if not force:
            raise PrerequisiteFailed("tuple is not left-inverse commuting with single Wold decompositions", lic)
        LOGGER.warning("prerequisites failed, continuing because force is set")
    return lic, singles


def wold_tuple(
    Ts: Sequence[DenseOperator], policy: TolerancePolicy | None = None, force: bool = False
) -> TupleWoldReport:
    """The ``2^n`` pieces ``H_alpha`` of a left-inverse commuting tuple."""
    policy = resolve_policy(policy)
    lic, singles = _tuple_prerequisites(Ts, policy, force)
    space = Ts[0].space
    full = Subspace.full(space, policy)
    kernels = [wandering_kernel(T, policy) for T in Ts]
    pieces: dict[Alpha, TuplePiece] = {}
    for alpha in product((0, 1), repeat=len(Ts)):
        wandering = full
        for i, bit in enumerate(alpha):
            if bit:
                wandering = intersect(wandering, kernels[i])
        unitary_dirs = [T for T, bit in zip(Ts, alpha) if bit == 0]
        shift_dirs = [T for T, bit in zip(Ts, alpha) if bit == 1]
        piece = joint_span(shift_dirs, joint_core(unitary_dirs, wandering))
        pieces[alpha] = TuplePiece(
            alpha=alpha,
            subspace=piece,
            unitary_residuals=tuple(unitary_defect(T, piece) for T in Ts),
            reducing_residuals=tuple(invariance_report(T, piece).reducing for T in Ts),
        )
    subspaces = [piece.subspace for piece in pieces.values()]
    orthogonality = max(
        (cross_gram_norm(a, b) for a, b in combinations(subspaces, 2)), default=0.0
    )
    report = TupleWoldReport(
        pieces=pieces,
        completeness_residual=_completeness(subspaces),
        orthogonality_residual=orthogonality,
        residual_tol=policy.residual_tol,
        prerequisites=lic,
        singles=singles,
    )
    LOGGER.info("tuple decomposition dims %s, passed=%s", report.dims, report.passed)
    return report


def dual_tuple(Ts: Sequence[DenseOperator], policy: TolerancePolicy | None = None) -> tuple[DenseOperator, ...]:
    """Cauchy duals ``(T_1', ..., T_n')``."""
    return tuple(cauchy_dual(T, policy) for T in Ts)


@dataclass(frozen=True)
class ComplementLemmaReport:
    residual: float
    orthogonality_residual: float
    analytic_dim: int
    residual_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.residual < self.residual_tol
            and self.orthogonality_residual < self.residual_tol
            and self.analytic_dim == 0
        )


def complement_lemma_check(
    T1: DenseOperator, T2: DenseOperator, policy: TolerancePolicy | None = None, force: bool = False
) -> ComplementLemmaReport:
    """``H_inf(T1) = T2 H_inf(T1) (+) core_T1(ker T2*)`` and analyticity of T2 off ``H00``."""
    policy = resolve_policy(policy)
    lic = check_left_inverse_commuting([T1, T2], policy)
    single = wold_single(T1, policy)
    if not (lic.passed and single.passed) and not force:
        raise PrerequisiteFailed("pair is not left-inverse commuting or T1 has no Wold decomposition", lic)
    h_inf = single.h_inf
    shifted = apply(T2, h_inf)
    core = directional_core(T1, wandering_kernel(T2, policy)).subspace
    residual = distance(h_inf, join(shifted, core))
    h00 = joint_core([T1, T2], Subspace.full(T1.space, policy))
    remainder = complement(h00, within=h_inf)
    analytic = directional_core(T2, remainder).subspace
    return ComplementLemmaReport(residual, cross_gram_norm(shifted, core), analytic.dim, policy.residual_tol)


@dataclass(frozen=True)
class LatticeCheck:
    residuals: dict[str, float]
    residual_tol: float

    @property
    def passed(self) -> bool:
        return all(value < self.residual_tol for value in self.residuals.values())


def wandering_lemma_check(
    T1: DenseOperator, T2: DenseOperator, policy: TolerancePolicy | None = None
) -> LatticeCheck:
    """``W1(E1) - T2 W1(E1) = E2 ∩ W1(E1) = W1(E1 ∩ E2)``."""
    policy = resolve_policy(policy)
    e1 = wandering_kernel(T1, policy)
    e2 = wandering_kernel(T2, policy)
    w1 = wandering_span(T1, e1, policy).subspace
    gap = complement(apply(T2, w1), within=w1)
    middle = intersect(e2, w1)
    generated = wandering_span(T1, intersect(e1, e2), policy).subspace
    return LatticeCheck(
        {"gap_vs_meet": distance(gap, middle), "meet_vs_span": distance(middle, generated)},
        policy.residual_tol,
    )


def range_complement_check(T: DenseOperator, policy: TolerancePolicy | None = None) -> LatticeCheck:
    """``H - TH`` against ``H_inf^perp ∩ (T H_inf^perp)^perp``."""
    policy = resolve_policy(policy)
    h_perp = complement(hyper_range(T, policy).subspace)
    expected = intersect(h_perp, complement(apply(T, h_perp)))
    return LatticeCheck({"range_complement": distance(wandering_kernel(T, policy), expected)}, policy.residual_tol)


STRUCTURAL_BLOCKS = ("H00", "D01", "D10", "D11")


@dataclass(frozen=True)
class StructuralReport:
    """Four-block form of a left-inverse commuting toral 2-isometric pair.

    ``H00`` carries both operators unitarily. ``D01`` is generated by ``T2``
    from ``E01`` (``T1`` unitary there, ``T2`` a Dirichlet shift with measure
    ``mu1``); ``D10`` mirrors it with ``mu2``; ``D11`` is generated from
    ``E = ker T1* ∩ ker T2*`` with measures ``nu1, nu2``.
    """

    h00: Subspace
    e01: Subspace
    e10: Subspace
    e: Subspace
    blocks: dict[str, Subspace]
    measures: dict[str, OpValuedMeasure | None]
    off_diagonal_residual: float
    completeness_residual: float
    unitary_residuals: dict[str, float]
    model_gram_residuals: dict[str, float]
    model: EquivalenceReport | None
    residual_tol: float

    @property
    def dims(self) -> dict[str, int]:
        return {name: block.dim for name, block in self.blocks.items()}

    @property
    def passed(self) -> bool:
        values = [self.off_diagonal_residual, self.completeness_residual]
        values += list(self.unitary_residuals.values()) + list(self.model_gram_residuals.values())
        return all(value < self.residual_tol for value in values)


def _block_cap(s: Subspace) -> int:
    headroom = s.headroom()
    return int(headroom) if np.isfinite(headroom) else 0


def structural_decomposition_pair(
    T1: DenseOperator, T2: DenseOperator, policy: TolerancePolicy | None = None, force: bool = False
) -> StructuralReport:
    policy = resolve_policy(policy)
    lic = check_left_inverse_commuting([T1, T2], policy)
    isometric = all(check_two_isometry(T, policy) < policy.residual_tol for T in (T1, T2))
    if not (lic.passed and isometric):
        if not force:
            raise PrerequisiteFailed("pair is not a left-inverse commuting pair of 2-isometries", lic)
        LOGGER.warning("structural prerequisites failed, continuing because force is set")
    full = Subspace.full(T1.space, policy)
    ker1 = wandering_kernel(T1, policy)
    ker2 = wandering_kernel(T2, policy)
    h00 = joint_core([T1, T2], full)
    e01 = directional_core(T1, ker2).subspace
    e10 = directional_core(T2, ker1).subspace
    e = intersect(ker1, ker2)
    blocks = {
        "H00": h00,
        "D01": wandering_span(T2, e01, policy).subspace,
        "D10": wandering_span(T1, e10, policy).subspace,
        "D11": joint_span([T1, T2], e),
    }
    measures: dict[str, OpValuedMeasure | None] = dict.fromkeys(("mu1", "mu2", "nu1", "nu2"))
    gram_residuals: dict[str, float] = {}
    for name, generator, shift, label in (("D01", e01, T2, "mu1"), ("D10", e10, T1, "mu2")):
        cap = _block_cap(generator)
        if generator.is_zero or cap < 1:
            continue
        mu = recover_measure(shift, generator, cap - 1, policy, check=False)
        measures[label] = mu
        gram_residuals[name] = one_variable_gram_residual(shift, generator, mu, cap)
    model = None
    cap = _block_cap(e)
    if not e.is_zero and cap >= 1:
        model = verify_model_equivalence(T1, T2, e, cap, policy, force=True)
        measures["nu1"], measures["nu2"] = model.recovered_mu1, model.recovered_mu2
        gram_residuals["D11"] = model.gram_residual
    nonzero = [block for block in blocks.values() if not block.is_zero]
    off_diagonal = 0.0
    for T in (T1, T2):
        for a, b in product(nonzero, repeat=2):
            if a is not b:
                off_diagonal = max(off_diagonal, a.space.norm(b.projection() @ (T @ a.frame)))
    unitary = {
        "T1@H00": unitary_defect(T1, blocks["H00"]),
        "T2@H00": unitary_defect(T2, blocks["H00"]),
        "T1@D01": unitary_defect(T1, blocks["D01"]),
        "T2@D10": unitary_defect(T2, blocks["D10"]),
    }
    report = StructuralReport(
        h00=h00,
        e01=e01,
        e10=e10,
        e=e,
        blocks=blocks,
        measures=measures,
        off_diagonal_residual=off_diagonal,
        completeness_residual=_completeness(list(blocks.values())),
        unitary_residuals=unitary,
        model_gram_residuals=gram_residuals,
        model=model,
        residual_tol=policy.residual_tol,
    )
    LOGGER.info("structural blocks %s, passed=%s", report.dims, report.passed)
    return report
