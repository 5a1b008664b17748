"""Gram-orthonormal frames and the subspace lattice built on them.

All geometry happens in whitened coordinates ``L^H x`` where the Gram becomes
the identity; frames are mapped back with ``L^-H`` so that
``frame^H G frame = I``. The zero subspace is an ordinary value with a
``dim x 0`` frame.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from woldlab.config import TolerancePolicy, resolve_policy
from woldlab.errors import InputError, NotNested
from woldlab.operators import ComplexMatrix, DenseOperator, InnerProductSpace, adjoint, same_space

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Subspace:
    frame: ComplexMatrix
    space: InnerProductSpace
    tol: TolerancePolicy

    @classmethod
    def zero(cls, space: InnerProductSpace, policy: TolerancePolicy | None = None) -> "Subspace":
        return cls(np.zeros((space.dim, 0), dtype=np.complex128), space, resolve_policy(policy))

    @classmethod
    def full(cls, space: InnerProductSpace, policy: TolerancePolicy | None = None) -> "Subspace":
        frame = space.coordinate_frame(np.ones(space.dim, dtype=bool))
        return cls(frame, space, resolve_policy(policy))

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    def whitened(self) -> ComplexMatrix:
        return self.space.whiten(self.frame)

    def projection(self) -> ComplexMatrix:
        """Gram-orthogonal projection ``F F^H G``."""
        return self.frame @ self.frame.conj().T @ self.space.gram

    def orthonormality_residual(self) -> float:
        if self.is_zero:
            return 0.0
        return float(np.linalg.norm(self.space.inner(self.frame, self.frame) - np.eye(self.dim), 2))

    def headroom(self) -> float:
        """Smallest headroom among the coordinates the frame touches."""
        if self.space.headroom is None or self.is_zero:
            return float("inf")
        weight = np.max(np.abs(self.frame), axis=1)
        support = weight > self.tol.rank_tol * max(weight.max(), 1.0)
        return float(self.space.headroom[support].min(initial=np.inf))


def orthonormalize(
    columns: ComplexMatrix,
    space: InnerProductSpace,
    rank_tol: float,
    scale: float | None = None,
) -> ComplexMatrix:
    """Gram-orthonormal frame of the column span.

    Full-rank input keeps its Gram-Schmidt order; rank-deficient input falls
    back to leading left singular vectors. Singular values at or below
    ``rank_tol * max(s_max, scale)`` count as zero.
    """
    if columns.shape[1] == 0:
        return np.zeros((space.dim, 0), dtype=np.complex128)
    whitened = space.whiten(columns)
    u, s, _ = linalg.svd(whitened, full_matrices=False)
    reference = max(s[0] if s.size else 0.0, scale or 0.0)
    if reference == 0.0:
        return np.zeros((space.dim, 0), dtype=np.complex128)
    rank = int(np.count_nonzero(s > rank_tol * reference))
    if rank == columns.shape[1]:
        q, r = linalg.qr(whitened, mode="economic")
        diag = np.diag(r)
        q = q * (diag / np.abs(diag))
    else:
        q = u[:, :rank]
    return space.unwhiten(q)


def column_span(
    columns: ComplexMatrix,
    space: InnerProductSpace,
    policy: TolerancePolicy | None = None,
    scale: float | None = None,
) -> Subspace:
    policy = resolve_policy(policy)
    return Subspace(orthonormalize(columns, space, policy.rank_tol, scale), space, policy)


def range_of(T: DenseOperator, policy: TolerancePolicy | None = None) -> Subspace:
    """Closed column span of ``T`` in its codomain."""
    return column_span(T.matrix, T.codomain, policy, scale=T.norm())


def kernel(T: DenseOperator, policy: TolerancePolicy | None = None) -> Subspace:
    """Null space of ``T`` in its domain; ``kernel(adjoint(T))`` is ``E_T``."""
    policy = resolve_policy(policy)
    domain = T.domain
    inner = T.codomain.whiten(T.matrix)
    whitened = linalg.solve_triangular(domain.cholesky, inner.conj().T, lower=True).conj().T
    _, s, vh = linalg.svd(whitened, full_matrices=True)
    rank = 0 if not s.size or s[0] == 0.0 else int(np.count_nonzero(s > policy.rank_tol * s[0]))
    null = vh[rank:].conj().T
    return Subspace(domain.unwhiten(null), domain, policy)


def wandering_kernel(T: DenseOperator, policy: TolerancePolicy | None = None) -> Subspace:
    """``E_T = ker T*``."""
    return kernel(adjoint(T), policy)


def _check_same(a: Subspace, b: Subspace) -> None:
    if not same_space(a.space, b.space):
        raise InputError("subspaces live in different spaces")


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Directions whose principal angle cosine exceeds ``1 - rank_tol``."""
    _check_same(a, b)
    if a.is_zero or b.is_zero:
        return Subspace.zero(a.space, a.tol)
    y, cosines, _ = linalg.svd(a.whitened().conj().T @ b.whitened())
    keep = int(np.count_nonzero(cosines > 1.0 - a.tol.rank_tol))
    return Subspace(a.frame @ y[:, :keep], a.space, a.tol)


def join(a: Subspace, b: Subspace) -> Subspace:
    _check_same(a, b)
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    return column_span(np.hstack([a.frame, b.frame]), a.space, a.tol)


def complement(a: Subspace, within: Subspace | None = None) -> Subspace:
    """``within`` minus ``a``; ``a`` must lie in ``within`` to residual_tol."""
    b = within if within is not None else Subspace.full(a.space, a.tol)
    _check_same(a, b)
    if a.is_zero:
        return b
    outside = a.frame - b.projection() @ a.frame
    defect = a.space.norm(outside)
    if defect > a.tol.residual_tol:
        raise NotNested(f"subspace leaves the container by {defect:.3e}")
    extra = b.dim - a.dim
    if extra <= 0:
        return Subspace.zero(a.space, a.tol)
    remainder = b.frame - a.projection() @ b.frame
    u, _, _ = linalg.svd(a.space.whiten(remainder), full_matrices=False)
    return Subspace(a.space.unwhiten(u[:, :extra]), a.space, a.tol)


def distance(a: Subspace, b: Subspace) -> float:
    """Sine of the largest principal angle; 1 when dimensions differ."""
    _check_same(a, b)
    if a.dim != b.dim:
        return 1.0
    if a.is_zero:
        return 0.0
    wa, wb = a.whitened(), b.whitened()
    return float(np.linalg.norm(wa @ wa.conj().T - wb @ wb.conj().T, 2))


def cross_gram_norm(a: Subspace, b: Subspace) -> float:
    """Largest cosine between ``a`` and ``b``; zero means orthogonal."""
    if a.is_zero or b.is_zero:
        return 0.0
    return float(np.linalg.norm(a.space.inner(a.frame, b.frame), 2))


def apply(T: DenseOperator, s: Subspace, power: int = 1) -> Subspace:
    """``T^power (S)``."""
    if s.is_zero:
        return s
    columns = s.frame
    for _ in range(power):
        columns = T @ columns
    return column_span(columns, s.space, s.tol, scale=T.norm() ** power)


@dataclass(frozen=True)
class InvarianceReport:
    invariant: float
    reducing: float


def invariance_report(T: DenseOperator, s: Subspace) -> InvarianceReport:
    """``||(I - P) T P||`` and the same with ``T*`` added for reducing."""
    if s.is_zero:
        return InvarianceReport(0.0, 0.0)
    projection = s.projection()
    image = T @ s.frame
    invariant = s.space.norm(image - projection @ image)
    co_image = adjoint(T) @ s.frame
    co_invariant = s.space.norm(co_image - projection @ co_image)
    return InvarianceReport(invariant, max(invariant, co_invariant))
