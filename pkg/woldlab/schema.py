"""JSON documents for operators, measures and reports (schema ``woldlab/1``).

Complex numbers travel as ``[re, im]`` pairs and matrices as row-major lists
of pairs. Residuals in reports are decimal strings with 17 significant digits.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Annotated, Any, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from woldlab.config import TolerancePolicy
from woldlab.dirichlet import model_space
from woldlab.errors import InputError, SchemaError
from woldlab.gallery import Example, ExampleSpec, make_example
from woldlab.graded import shift_operator
from woldlab.measures import OpValuedMeasure, make_measure
from woldlab.operators import ComplexMatrix, DenseOperator, InnerProductSpace

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = "woldlab/1"

ComplexPair = tuple[float, float]


def encode_complex(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def encode_matrix(matrix: ComplexMatrix) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(matrix).ravel()]


def decode_matrix(entries: Sequence[Sequence[float]], shape: tuple[int, int]) -> ComplexMatrix:
    values = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return values.reshape(shape)


def format_residual(value: float) -> str:
    return format(float(value), ".16e")


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AtomDocument(_Document):
    angle: float
    weight: list[ComplexPair] = Field(default_factory=lambda: [(1.0, 0.0)])


class MeasureDocument(_Document):
    """A measure window. ``coefficients`` lists ``mu_hat(0..window)`` for ``fourier``/``trig_density``."""

    kind: Literal["zero", "lebesgue", "atoms", "trig_density", "fourier"]
    window: int = Field(ge=0)
    coeff_dim: int = Field(default=1, ge=1)
    scale: float | None = None
    atoms: list[AtomDocument] = Field(default_factory=list)
    coefficients: list[list[ComplexPair]] = Field(default_factory=list)

    def _block(self, entries: Sequence[Sequence[float]]) -> ComplexMatrix:
        d = self.coeff_dim
        if len(entries) == 1:
            return decode_matrix(entries, (1, 1))[0, 0] * np.eye(d)
        if len(entries) != d * d:
            raise SchemaError(f"block has {len(entries)} entries, expected {d * d}", "/coefficients")
        return decode_matrix(entries, (d, d))

    def to_measure(self, policy: TolerancePolicy | None = None) -> OpValuedMeasure:
        if self.kind == "fourier":
            if len(self.coefficients) != self.window + 1:
                raise SchemaError("fourier measure needs mu_hat(0..window)", "/coefficients")
            return OpValuedMeasure.from_nonnegative([self._block(c) for c in self.coefficients])
        atoms = [(a.angle, self._block(a.weight)) for a in self.atoms]
        coefficients = [self._block(c) for c in self.coefficients] or None
        return make_measure(
            self.kind,
            self.window,
            self.coeff_dim,
            scale=self.scale,
            atoms=atoms or None,
            coefficients=coefficients,
            policy=policy,
        )

    @classmethod
    def from_measure(cls, mu: OpValuedMeasure) -> "MeasureDocument":
        """Lossless ``fourier`` document of any measure window."""
        return cls(
            kind="fourier",
            window=mu.window,
            coeff_dim=mu.coeff_dim,
            coefficients=[encode_matrix(mu.coefficient(k)) for k in range(mu.window + 1)],
        )


class DenseDocument(_Document):
    """One flattened ``shape`` matrix per operator of the tuple, on a shared space."""

    kind: Literal["dense"] = "dense"
    shape: tuple[int, int]
    entries: list[list[ComplexPair]] = Field(min_length=1)
    gram: list[ComplexPair] | None = None
    headroom: list[float | None] | None = None
    windows: list[list[bool] | None] | None = None

    @model_validator(mode="after")
    def _consistent(self) -> "DenseDocument":
        rows, cols = self.shape
        if rows != cols:
            raise ValueError(f"operators must be square, got shape {self.shape}")
        for matrix in self.entries:
            if len(matrix) != rows * cols:
                raise ValueError(f"matrix has {len(matrix)} entries, shape needs {rows * cols}")
        if self.gram is not None and len(self.gram) != rows * cols:
            raise ValueError("gram must match the operator shape")
        if self.headroom is not None and len(self.headroom) != rows:
            raise ValueError("headroom needs one entry per basis vector")
        if self.windows is not None and len(self.windows) != len(self.entries):
            raise ValueError("windows needs one entry per operator")
        return self


class GradedDocument(_Document):
    """Coordinate shifts on the model space of ``mu1`` (and ``mu2`` for pairs)."""

    kind: Literal["graded"] = "graded"
    mu1: MeasureDocument
    mu2: MeasureDocument | None = None
    cap: int = Field(ge=1)
    shifts: list[tuple[int, int]] | None = None


class GalleryDocument(_Document):
    kind: Literal["gallery"] = "gallery"
    name: str
    params: dict[str, int | float | str] = Field(default_factory=dict)


OperatorDocument = Annotated[Union[DenseDocument, GradedDocument, GalleryDocument], Field(discriminator="kind")]
OPERATOR_ADAPTER: TypeAdapter[Any] = TypeAdapter(OperatorDocument)


def _pointer(exc: ValidationError) -> str:
    loc = exc.errors()[0]["loc"] if exc.errors() else ()
    return "/" + "/".join(str(part) for part in loc)


def parse_operator_document(text: str) -> DenseDocument | GradedDocument | GalleryDocument:
    try:
        return OPERATOR_ADAPTER.validate_json(text)
    except ValidationError as exc:
        pointer = _pointer(exc)
        raise SchemaError(exc.errors()[0]["msg"], pointer) from exc


def load_operator_document(path: Path) -> DenseDocument | GradedDocument | GalleryDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_operator_document(text)


def dump_operator_document(doc: DenseDocument | GradedDocument | GalleryDocument) -> str:
    return json.dumps(OPERATOR_ADAPTER.dump_python(doc, mode="json"), indent=2)


def dense_document(ops: Sequence[DenseOperator]) -> DenseDocument:
    space = ops[0].space
    headroom = None
    if space.headroom is not None:
        headroom = [float(h) if np.isfinite(h) else None for h in space.headroom]
    return DenseDocument(
        shape=ops[0].matrix.shape,
        entries=[encode_matrix(T.matrix) for T in ops],
        gram=encode_matrix(space.gram),
        headroom=headroom,
        windows=[None if T.window is None else T.window.tolist() for T in ops],
    )


def _dense_operators(doc: DenseDocument) -> tuple[DenseOperator, ...]:
    gram = np.eye(doc.shape[0]) if doc.gram is None else decode_matrix(doc.gram, doc.shape)
    headroom = None
    if doc.headroom is not None:
        headroom = np.array([np.inf if h is None else h for h in doc.headroom])
    space = InnerProductSpace(gram, headroom)
    windows = doc.windows or [None] * len(doc.entries)
    return tuple(
        DenseOperator.on(decode_matrix(entries, doc.shape), space, window)
        for entries, window in zip(doc.entries, windows)
    )


def _graded_operators(doc: GradedDocument, policy: TolerancePolicy | None) -> tuple[DenseOperator, ...]:
    mu1 = doc.mu1.to_measure(policy)
    mu2 = doc.mu2.to_measure(policy) if doc.mu2 is not None else None
    space = model_space(mu1, mu2, doc.cap, policy)
    shifts = doc.shifts or ([(1, 0), (0, 1)] if mu2 is not None else [(1, 0)])
    return tuple(shift_operator(space, tuple(s)) for s in shifts)


def resolve_document(
    doc: DenseDocument | GradedDocument | GalleryDocument,
    policy: TolerancePolicy | None = None,
) -> tuple[tuple[DenseOperator, ...], Example | None]:
    """Operators described by ``doc``; gallery documents also return their example."""
    if isinstance(doc, GalleryDocument):
        example = make_example(ExampleSpec(name=doc.name, params=doc.params))
        return example.operators, example
    if isinstance(doc, GradedDocument):
        return _graded_operators(doc, policy), None
    return _dense_operators(doc), None


class ErrorDocument(_Document):
    type: str
    message: str
    pointer: str | None = None


class ReportDocument(_Document):
    """Command result; field order is fixed so dumps are byte-stable."""

    schema_: Literal["woldlab/1"] = Field(default=SCHEMA_VERSION, alias="schema")
    command: list[str]
    policy: dict[str, str]
    passed: bool
    exit_code: int
    dims: dict[str, int] = Field(default_factory=dict)
    pieces: dict[str, int] = Field(default_factory=dict)
    residuals: dict[str, str] = Field(default_factory=dict)
    flags: dict[str, bool] = Field(default_factory=dict)
    measures: dict[str, list[list[ComplexPair]]] = Field(default_factory=dict)
    error: ErrorDocument | None = None

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        try:
            return cls.model_validate_json(text)
        except ValidationError as exc:
            raise SchemaError("invalid report document", _pointer(exc)) from exc


def policy_echo(policy: TolerancePolicy) -> dict[str, str]:
    return {
        "rank_tol": format_residual(policy.rank_tol),
        "residual_tol": format_residual(policy.residual_tol),
        "max_iter": str(policy.max_iter),
    }


def measure_payload(mu: OpValuedMeasure) -> list[list[ComplexPair]]:
    return [[tuple(pair) for pair in encode_matrix(mu.coefficient(k))] for k in range(mu.window + 1)]
