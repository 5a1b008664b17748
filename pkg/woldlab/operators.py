"""Finite inner-product spaces, operators on them and the pointwise identities.

Conventions
-----------
* ``<x, y> = y^H G x`` so that ``G[r, c] = <e_c, e_r>``.
* Adjoints are taken with respect to the stored Grams: ``A* = G_dom^-1 A^H G_cod``.
* A space may carry a per-basis ``headroom``: how many degree-raising
  applications of a shift remain honest on that basis vector. Dense blocks have
  unbounded headroom. An operator may carry a domain ``window`` mask; columns
  outside it are zero and are never trusted.
* Checks that compose ``k`` operators are evaluated on basis vectors with
  headroom at least ``k``, as sesquilinear forms built from the Gram.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg

from woldlab.config import TolerancePolicy, resolve_policy
from woldlab.errors import (
    CapTooSmall,
    GramSingular,
    InputError,
    NonCommuting,
    NotLeftInvertible,
)

LOGGER = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]


def as_complex(a: npt.ArrayLike) -> ComplexMatrix:
    return np.array(a, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class InnerProductSpace:
    """Coordinate space ``C^dim`` with a positive definite Gram matrix."""

    gram: ComplexMatrix
    headroom: npt.NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        gram = as_complex(self.gram)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise InputError(f"gram must be square, got shape {gram.shape}")
        object.__setattr__(self, "gram", gram)
        if self.headroom is not None:
            headroom = np.asarray(self.headroom, dtype=float)
            if headroom.shape != (gram.shape[0],):
                raise InputError("headroom must have one entry per basis vector")
            object.__setattr__(self, "headroom", headroom)

    @classmethod
    def euclidean(cls, dim: int) -> "InnerProductSpace":
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def bounded(self) -> bool:
        """True when some basis vector has finite headroom."""
        return self.headroom is not None and bool(np.isfinite(self.headroom).any())

    @cached_property
    def cholesky(self) -> ComplexMatrix:
        """Lower factor ``L`` with ``G = L L^H``."""
        herm = 0.5 * (self.gram + self.gram.conj().T)
        try:
            return linalg.cholesky(herm, lower=True)
        except linalg.LinAlgError as exc:
            raise GramSingular(f"gram of dimension {self.dim} is not positive definite") from exc

    def validate(self, policy: TolerancePolicy | None = None) -> "InnerProductSpace":
        policy = resolve_policy(policy)
        asym = np.max(np.abs(self.gram - self.gram.conj().T), initial=0.0)
        if asym > policy.residual_tol:
            raise InputError(f"gram is not Hermitian (deviation {asym:.3e})")
        eigs = linalg.eigvalsh(0.5 * (self.gram + self.gram.conj().T))
        if eigs.size and eigs[0] <= policy.rank_tol * max(eigs[-1], 0.0):
            raise GramSingular(f"gram smallest eigenvalue {eigs[0]:.3e} not above rank_tol")
        return self

    def whiten(self, x: ComplexMatrix) -> ComplexMatrix:
        """Coordinates in which the Gram becomes the identity (``L^H x``)."""
        return self.cholesky.conj().T @ x

    def unwhiten(self, q: ComplexMatrix) -> ComplexMatrix:
        return linalg.solve_triangular(self.cholesky.conj().T, q, lower=False)

    def inner(self, x: ComplexMatrix, y: ComplexMatrix) -> ComplexMatrix:
        """Matrix of inner products ``[<x_c, y_r>]``, i.e. ``y^H G x``."""
        return y.conj().T @ self.gram @ x

    def norm(self, x: ComplexMatrix) -> float:
        """Operator norm of the columns ``x`` as a map from Euclidean coefficients."""
        if x.size == 0:
            return 0.0
        return float(np.linalg.norm(self.whiten(x), 2))

    def window_mask(self, depth: int) -> npt.NDArray[np.bool_]:
        if self.headroom is None:
            return np.ones(self.dim, dtype=bool)
        return self.headroom >= depth

    def coordinate_frame(self, mask: npt.NDArray[np.bool_]) -> ComplexMatrix:
        """Gram-orthonormal frame of ``span{e_k : mask[k]}``, Gram-Schmidt order."""
        cols = np.eye(self.dim, dtype=np.complex128)[:, mask]
        if cols.shape[1] == 0:
            return cols
        q, r = linalg.qr(self.whiten(cols), mode="economic")
        diag = np.diag(r)
        q = q * (diag / np.abs(diag))
        return self.unwhiten(q)

    def restrict(self, mask: npt.NDArray[np.bool_]) -> "InnerProductSpace":
        headroom = None if self.headroom is None else self.headroom[mask]
        return InnerProductSpace(self.gram[np.ix_(mask, mask)], headroom)


def same_space(a: InnerProductSpace, b: InnerProductSpace) -> bool:
    if a is b:
        return True
    return a.dim == b.dim and np.allclose(a.gram, b.gram)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Complex matrix acting from ``domain`` to ``codomain``."""

    matrix: ComplexMatrix
    domain: InnerProductSpace
    codomain: InnerProductSpace
    window: npt.NDArray[np.bool_] | None = field(default=None)

    def __post_init__(self) -> None:
        matrix = as_complex(self.matrix)
        if matrix.shape != (self.codomain.dim, self.domain.dim):
            raise InputError(
                f"matrix shape {matrix.shape} does not match "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        object.__setattr__(self, "matrix", matrix)
        if self.window is not None:
            window = np.asarray(self.window, dtype=bool)
            if window.shape != (self.domain.dim,):
                raise InputError("window must have one entry per domain basis vector")
            object.__setattr__(self, "window", window)

    @classmethod
    def on(cls, matrix: npt.ArrayLike, space: InnerProductSpace | None = None, window=None) -> "DenseOperator":
        """Endomorphism of ``space`` (Euclidean when omitted)."""
        matrix = as_complex(matrix)
        space = space if space is not None else InnerProductSpace.euclidean(matrix.shape[1])
        return cls(matrix, space, space, window)

    @property
    def space(self) -> InnerProductSpace:
        if not self.is_endomorphism:
            raise InputError("operator is not an endomorphism")
        return self.domain

    @property
    def is_endomorphism(self) -> bool:
        return same_space(self.domain, self.codomain)

    @property
    def window_mask(self) -> npt.NDArray[np.bool_]:
        if self.window is None:
            return np.ones(self.domain.dim, dtype=bool)
        return self.window

    @property
    def truncated(self) -> bool:
        return self.window is not None and not bool(self.window.all())

    def restrict(self) -> "DenseOperator":
        """The operator on its honest columns only."""
        mask = self.window_mask
        return DenseOperator(self.matrix[:, mask], self.domain.restrict(mask), self.codomain)

    def pad(self, columns: ComplexMatrix) -> ComplexMatrix:
        """Scatter window columns back into a full-width matrix."""
        full = np.zeros((columns.shape[0], self.domain.dim), dtype=np.complex128)
        full[:, self.window_mask] = columns
        return full

    def power(self, k: int) -> ComplexMatrix:
        return np.linalg.matrix_power(self.matrix, k)

    def norm(self) -> float:
        return op_norm(self.matrix, self.domain, self.codomain)

    def __matmul__(self, other: ComplexMatrix) -> ComplexMatrix:
        return self.matrix @ other


def op_norm(matrix: ComplexMatrix, domain: InnerProductSpace, codomain: InnerProductSpace) -> float:
    """Operator norm with respect to the two Grams."""
    if matrix.size == 0:
        return 0.0
    inner = codomain.whiten(matrix)
    whitened = linalg.solve_triangular(domain.cholesky, inner.conj().T, lower=True).conj().T
    return float(np.linalg.norm(whitened, 2))


def adjoint(T: DenseOperator) -> DenseOperator:
    """``G_dom^-1 A^H G_cod``; raises GramSingular for singular Grams."""
    rhs = T.matrix.conj().T @ T.codomain.gram
    star = linalg.cho_solve((T.domain.cholesky, True), rhs)
    return DenseOperator(star, T.codomain, T.domain)


def _restricted_normal(T: DenseOperator, policy: TolerancePolicy) -> tuple[ComplexMatrix, ComplexMatrix]:
    """``R`` (window columns) and ``R^H G R``, checking left invertibility."""
    restricted = T.restrict()
    if restricted.domain.dim > T.codomain.dim:
        raise NotLeftInvertible("window is larger than the codomain")
    if restricted.domain.dim == 0:
        raise NotLeftInvertible("operator has an empty window")
    sv = linalg.svdvals(
        linalg.solve_triangular(
            restricted.domain.cholesky, T.codomain.whiten(restricted.matrix).conj().T, lower=True
        )
    )
    if sv[-1] <= policy.rank_tol * max(sv[0], 0.0) or sv[0] == 0.0:
        raise NotLeftInvertible(f"smallest singular value {sv[-1]:.3e} at rank_tol cutoff")
    r = restricted.matrix
    return r, r.conj().T @ T.codomain.gram @ r


def left_inverse(T: DenseOperator, policy: TolerancePolicy | None = None) -> DenseOperator:
    """``L = (T*T)^-1 T*`` on the honest window.

    The result maps the codomain onto the window coordinates of the domain;
    use :func:`embedded_left_inverse` for a square matrix on the full domain.
    """
    policy = resolve_policy(policy)
    r, normal = _restricted_normal(T, policy)
    lmat = linalg.solve(normal, r.conj().T @ T.codomain.gram, assume_a="her")
    return DenseOperator(lmat, T.codomain, T.domain.restrict(T.window_mask))


def embedded_left_inverse(T: DenseOperator, policy: TolerancePolicy | None = None) -> ComplexMatrix:
    lmat = left_inverse(T, policy).matrix
    full = np.zeros((T.domain.dim, T.codomain.dim), dtype=np.complex128)
    full[T.window_mask, :] = lmat
    return full


def cauchy_dual(T: DenseOperator, policy: TolerancePolicy | None = None) -> DenseOperator:
    """``T' = T (T*T)^-1`` on the window, padded with zero columns outside it."""
    policy = resolve_policy(policy)
    r, normal = _restricted_normal(T, policy)
    window_gram = T.domain.gram[np.ix_(T.window_mask, T.window_mask)]
    dual = r @ linalg.solve(normal, window_gram, assume_a="her")
    return DenseOperator(T.pad(dual), T.domain, T.codomain, T.window)


def _common_space(Ts: Sequence[DenseOperator]) -> InnerProductSpace:
    if not Ts:
        raise InputError("at least one operator is required")
    space = Ts[0].space
    for T in Ts[1:]:
        if not same_space(space, T.space):
            raise InputError("operators do not share a common space")
    return space


def _check_frame(space: InnerProductSpace, depth: int) -> ComplexMatrix:
    mask = space.window_mask(depth)
    if not mask.any():
        raise CapTooSmall(f"no basis vector has headroom {depth}")
    return space.coordinate_frame(mask)


@dataclass(frozen=True)
class LicReport:
    lic_residuals: dict[tuple[int, int], float]
    commutator_residuals: dict[tuple[int, int], float]
    residual_tol: float

    @property
    def lic_residual(self) -> float:
        return max(self.lic_residuals.values(), default=0.0)

    @property
    def commutator_residual(self) -> float:
        return max(self.commutator_residuals.values(), default=0.0)

    @property
    def commuting(self) -> bool:
        return self.commutator_residual < self.residual_tol

    @property
    def passed(self) -> bool:
        return self.lic_residual < self.residual_tol and self.commuting


def check_left_inverse_commuting(
    Ts: Sequence[DenseOperator],
    policy: TolerancePolicy | None = None,
    strict: bool = False,
) -> LicReport:
    """Residuals of ``L_i T_j = T_j L_i`` (i != j) and of the commutators.

    Both families are evaluated on the basis vectors with headroom 2. A
    commutator above tolerance is reported, and only raised when ``strict``.
    """
    policy = resolve_policy(policy)
    space = _common_space(Ts)
    frame = _check_frame(space, 2)
    lefts = [embedded_left_inverse(T, policy) for T in Ts]
    lic: dict[tuple[int, int], float] = {}
    comm: dict[tuple[int, int], float] = {}
    for i, j in product(range(len(Ts)), repeat=2):
        if i == j:
            continue
        diff = lefts[i] @ (Ts[j] @ frame) - Ts[j] @ (lefts[i] @ frame)
        lic[(i + 1, j + 1)] = space.norm(diff)
    for i, j in combinations(range(len(Ts)), 2):
        diff = Ts[i] @ (Ts[j] @ frame) - Ts[j] @ (Ts[i] @ frame)
        comm[(i + 1, j + 1)] = space.norm(diff)
    report = LicReport(lic, comm, policy.residual_tol)
    LOGGER.debug("lic residual %.3e, commutator %.3e", report.lic_residual, report.commutator_residual)
    if strict and not report.commuting:
        raise NonCommuting(f"commutator residual {report.commutator_residual:.3e}", report)
    return report


def _spectral(form: ComplexMatrix) -> float:
    if form.size == 0:
        return 0.0
    return float(np.max(np.abs(linalg.eigvalsh(0.5 * (form + form.conj().T)))))


def check_two_isometry(T: DenseOperator, policy: TolerancePolicy | None = None) -> float:
    """Norm of ``I - 2T*T + T*^2 T^2`` compressed to the headroom-2 window."""
    space = T.space
    frame = _check_frame(space, 2)
    once = T @ frame
    twice = T @ once
    form = space.inner(twice, twice) - 2.0 * space.inner(once, once) + space.inner(frame, frame)
    return _spectral(form)


@dataclass(frozen=True)
class ToralReport:
    residuals: dict[tuple[int, int], float]
    commutator_residual: float
    residual_tol: float

    @property
    def residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.residual < self.residual_tol


def check_toral_two_isometry(
    T1: DenseOperator, T2: DenseOperator, policy: TolerancePolicy | None = None
) -> ToralReport:
    """Forms ``<T_iT_j e, T_iT_j f> - <T_i e, T_i f> - <T_j e, T_j f> + <e, f>``."""
    policy = resolve_policy(policy)
    space = _common_space([T1, T2])
    frame = _check_frame(space, 2)
    ops = {1: T1, 2: T2}
    images = {i: op @ frame for i, op in ops.items()}
    residuals: dict[tuple[int, int], float] = {}
    for i, j in product((1, 2), repeat=2):
        both = ops[i] @ images[j]
        form = (
            space.inner(both, both)
            - space.inner(images[i], images[i])
            - space.inner(images[j], images[j])
            + space.inner(frame, frame)
        )
        residuals[(i, j)] = _spectral(form)
    commutator = space.norm(T1 @ images[2] - T2 @ images[1])
    return ToralReport(residuals, commutator, policy.residual_tol)


def direct_sum(*ops: DenseOperator) -> DenseOperator:
    """Block-diagonal operator on the orthogonal direct sum of the spaces."""
    if not ops:
        raise InputError("direct sum of nothing")
    gram = linalg.block_diag(*(op.space.gram for op in ops))
    headroom = np.concatenate(
        [op.space.headroom if op.space.headroom is not None else np.full(op.space.dim, np.inf) for op in ops]
    )
    space = InnerProductSpace(gram, headroom)
    window = None
    if any(op.window is not None for op in ops):
        window = np.concatenate([op.window_mask for op in ops])
    return DenseOperator.on(linalg.block_diag(*(op.matrix for op in ops)), space, window)


def direct_sum_tuples(*tuples: Sequence[DenseOperator]) -> tuple[DenseOperator, ...]:
    """Componentwise direct sum of equally long operator tuples."""
    lengths = {len(t) for t in tuples}
    if len(lengths) != 1:
        raise InputError("operator tuples have different lengths")
    return tuple(direct_sum(*parts) for parts in zip(*tuples))


def tensor_space(a: InnerProductSpace, b: InnerProductSpace) -> InnerProductSpace:
    ha = a.headroom if a.headroom is not None else np.full(a.dim, np.inf)
    hb = b.headroom if b.headroom is not None else np.full(b.dim, np.inf)
    headroom = np.minimum.outer(ha, hb).ravel()
    return InnerProductSpace(np.kron(a.gram, b.gram), headroom)


def tensor(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """``A (x) B`` on the tensor product of the two spaces."""
    space = tensor_space(a.space, b.space)
    window = None
    if a.window is not None or b.window is not None:
        window = np.logical_and.outer(a.window_mask, b.window_mask).ravel()
    return DenseOperator.on(np.kron(a.matrix, b.matrix), space, window)


def identity(space: InnerProductSpace) -> DenseOperator:
    return DenseOperator.on(np.eye(space.dim, dtype=np.complex128), space)
