"""Registry of constructed operator tuples with known answers.

Every builder returns the operators together with an expectation record:
total ``dim``, per-operator ``wold`` dimensions ``[h_inf, wandering]``, tuple
piece dimensions keyed by alpha bitstrings, structural block dimensions, the
expected verdicts of the identity checks, and scalar measure coefficients
(``mu_hat(k) = c_k I``) where recovery is basis independent.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from woldlab.dirichlet import model_space, mz_operators
from woldlab.errors import InputError, UnknownExample
from woldlab.graded import GradedIndex, GradedSpace, graded_indices, shift_operator
from woldlab.measures import parse_measure, random_atom_measure
from woldlab.operators import (
    ComplexMatrix,
    DenseOperator,
    direct_sum_tuples,
    identity,
    tensor,
)

LOGGER = logging.getLogger(__name__)

ParamValue = int | float | str


class ExampleSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    params: dict[str, ParamValue] = Field(default_factory=dict)


@dataclass(frozen=True)
class Example:
    name: str
    params: dict[str, ParamValue]
    operators: tuple[DenseOperator, ...]
    expectation: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GalleryEntry:
    builder: Callable[..., tuple[tuple[DenseOperator, ...], dict[str, Any]]]
    defaults: dict[str, ParamValue]
    description: str


def phase_permutation(d: int) -> ComplexMatrix:
    """Cyclic permutation with phases ``i^(k+1)``; entries stay in ``{0, ±1, ±i}``."""
    shift = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)
    return np.diag([1j ** (k + 1) for k in range(d)]) @ shift


def unitary(d: int) -> DenseOperator:
    return DenseOperator.on(phase_permutation(d))


def hardy_shift(cap: int) -> DenseOperator:
    return shift_operator(GradedSpace.hardy(cap, nvars=1))


def dirichlet_shift(mu: str, cap: int) -> DenseOperator:
    return shift_operator(model_space(parse_measure(mu, cap), None, cap))


def product_tuple(factors: list[DenseOperator]) -> tuple[DenseOperator, ...]:
    """``T_i`` acts as ``factors[i]`` in slot ``i`` and as the identity elsewhere."""
    ops = []
    for i in range(len(factors)):
        slots = [f if j == i else identity(f.space) for j, f in enumerate(factors)]
        ops.append(reduce(tensor, slots))
    return tuple(ops)


def _pieces(dims: dict[tuple[int, ...], int]) -> dict[str, int]:
    return {"".join(map(str, alpha)): dim for alpha, dim in sorted(dims.items())}


def _pair_size(cap: int) -> int:
    return (cap + 1) * (cap + 2) // 2


def _hardy_shift_example(cap: int):
    return (hardy_shift(cap),), {"dim": cap + 1, "wold": [[0, cap + 1]], "two_isometry": [True]}


def _dirichlet_shift_example(cap: int, mu: str):
    expectation = {"dim": cap + 1, "wold": [[0, cap + 1]], "two_isometry": [True]}
    if mu.startswith("lebesgue"):
        scale = float(mu.split(":")[1]) if ":" in mu else 1.0
        expectation["measures"] = {"mu": [scale] + [0.0] * (cap - 1)}
    return (dirichlet_shift(mu, cap),), expectation


def _shift_pair_expectation(cap: int, coeff_dim: int = 1) -> dict[str, Any]:
    size = _pair_size(cap) * coeff_dim
    return {
        "dim": size,
        "wold": [[0, size], [0, size]],
        "pieces": {"00": 0, "01": 0, "10": 0, "11": size},
        "structural": {"H00": 0, "D01": 0, "D10": 0, "D11": size},
        "lic": True,
        "toral": True,
        "model": True,
    }


def _hardy_bidisc_example(cap: int):
    expectation = _shift_pair_expectation(cap)
    expectation["measures"] = {"mu1": [0.0] * cap, "mu2": [0.0] * cap}
    return mz_operators(GradedSpace.hardy(cap)), expectation


def _dirichlet_pair_example(cap: int, mu1: str, mu2: str):
    space = model_space(parse_measure(mu1, cap), parse_measure(mu2, cap), cap)
    expectation = _shift_pair_expectation(cap)
    measures = {}
    for name, text in (("mu1", mu1), ("mu2", mu2)):
        if text.startswith("lebesgue"):
            scale = float(text.split(":")[1]) if ":" in text else 1.0
            measures[name] = [scale] + [0.0] * (cap - 1)
    if measures:
        expectation["measures"] = measures
    return mz_operators(space), expectation


def _unitary_example(d: int):
    return (unitary(d),), {"dim": d, "wold": [[d, 0]], "two_isometry": [True]}


def _unitary_pair_example(d: int):
    size = d * d
    return product_tuple([unitary(d), unitary(d)]), {
        "dim": size,
        "wold": [[size, 0], [size, 0]],
        "pieces": {"00": size, "01": 0, "10": 0, "11": 0},
        "structural": {"H00": size, "D01": 0, "D10": 0, "D11": 0},
        "lic": True,
        "toral": True,
    }


def _scalar_example(d: int):
    op = DenseOperator.on(2.0 * np.eye(d))
    return (op,), {"dim": d, "wold": [[d, 0]], "two_isometry": [False], "wold_passes": [False]}


def _unitary_plus_shift_example(d: int, cap: int):
    ops = direct_sum_tuples((unitary(d),), (hardy_shift(cap),))
    return ops, {"dim": d + cap + 1, "wold": [[d, cap + 1]], "two_isometry": [True]}


def _four_block_example(d: int, cap: int):
    u, s = unitary(d), hardy_shift(cap)
    blocks = {
        (0, 0): product_tuple([u, u]),
        (0, 1): product_tuple([u, s]),
        (1, 0): product_tuple([s, u]),
        (1, 1): mz_operators(GradedSpace.hardy(cap)),
    }
    dims = {(0, 0): d * d, (0, 1): d * (cap + 1), (1, 0): d * (cap + 1), (1, 1): _pair_size(cap)}
    total = sum(dims.values())
    h1 = dims[(0, 0)] + dims[(0, 1)]
    h2 = dims[(0, 0)] + dims[(1, 0)]
    ops = direct_sum_tuples(*blocks.values())
    return ops, {
        "dim": total,
        "wold": [[h1, total - h1], [h2, total - h2]],
        "pieces": _pieces(dims),
        "lic": True,
    }


def _box_blocks(d: int, cap: int, n: int):
    u, s = unitary(d), hardy_shift(cap)
    tuples, dims = [], {}
    for alpha in product((0, 1), repeat=n):
        tuples.append(product_tuple([s if bit else u for bit in alpha]))
        dims[alpha] = d ** alpha.count(0) * (cap + 1) ** alpha.count(1)
    return tuples, dims


def _eight_block_example(d: int, cap: int):
    tuples, dims = _box_blocks(d, cap, 3)
    total = sum(dims.values())
    wold = []
    for i in range(3):
        h = sum(dim for alpha, dim in dims.items() if alpha[i] == 0)
        wold.append([h, total - h])
    return direct_sum_tuples(*tuples), {"dim": total, "wold": wold, "pieces": _pieces(dims), "lic": True}


def _triple_uss_example(d: int, cap: int):
    ops = product_tuple([unitary(d), hardy_shift(cap), hardy_shift(cap)])
    total = d * (cap + 1) ** 2
    dims = {alpha: 0 for alpha in product((0, 1), repeat=3)}
    dims[(0, 1, 1)] = total
    return ops, {
        "dim": total,
        "wold": [[total, 0], [0, total], [0, total]],
        "pieces": _pieces(dims),
        "lic": True,
    }


def _unitary_dirichlet_example(d: int, cap: int, mu: str):
    ops = product_tuple([unitary(d), dirichlet_shift(mu, cap)])
    total = d * (cap + 1)
    return ops, {
        "dim": total,
        "wold": [[total, 0], [0, total]],
        "pieces": {"00": 0, "01": total, "10": 0, "11": 0},
        "structural": {"H00": 0, "D01": total, "D10": 0, "D11": 0},
        "lic": True,
        "toral": True,
    }


def _structural_mix_example(d: int, cap: int, mu: str, nu1: str, nu2: str):
    pair_space = model_space(parse_measure(nu1, cap), parse_measure(nu2, cap), cap)
    ops = direct_sum_tuples(
        product_tuple([unitary(d), unitary(d)]),
        product_tuple([unitary(d), dirichlet_shift(mu, cap)]),
        mz_operators(pair_space),
    )
    blocks = {"H00": d * d, "D01": d * (cap + 1), "D10": 0, "D11": _pair_size(cap)}
    total = sum(blocks.values())
    expectation: dict[str, Any] = {
        "dim": total,
        "wold": [[blocks["H00"] + blocks["D01"], blocks["D11"]], [blocks["H00"], total - blocks["H00"]]],
        "pieces": {"00": blocks["H00"], "01": blocks["D01"], "10": 0, "11": blocks["D11"]},
        "structural": blocks,
        "lic": True,
        "toral": True,
    }
    measures = {}
    for name, text, window in (("mu1", mu, cap), ("nu1", nu1, cap), ("nu2", nu2, cap)):
        if text.startswith("lebesgue"):
            scale = float(text.split(":")[1]) if ":" in text else 1.0
            measures[name] = [scale] + [0.0] * (window - 1)
    if measures:
        expectation["measures"] = measures
    return ops, expectation


def _bergman_pair_example(cap: int):
    weights = [1.0 / ((idx.m + 1) * (idx.n + 1)) for idx in graded_indices(cap, 2)]
    space = GradedSpace(np.diag(weights).astype(np.complex128), cap=cap, coeff_dim=1, nvars=2)
    size = _pair_size(cap)
    return mz_operators(space), {
        "dim": size,
        "wold": [[0, size], [0, size]],
        "toral": False,
        "negative_control": True,
    }


def _perturbed_pair_example(cap: int, eps: float):
    t1, t2 = mz_operators(GradedSpace.hardy(cap))
    perturbed = DenseOperator(t2.matrix + eps * t1.matrix, t2.domain, t2.codomain, t1.window_mask & t2.window_mask)
    return (t1, perturbed), {
        "dim": _pair_size(cap),
        "lic": False,
        "model": False,
        "negative_control": True,
    }


def _random_atom_pair_example(cap: int, seed: int, coeff_dim: int):
    rng = np.random.default_rng(seed)
    mu1 = random_atom_measure(rng, cap, coeff_dim)
    mu2 = random_atom_measure(rng, cap, coeff_dim)
    return mz_operators(model_space(mu1, mu2, cap)), _shift_pair_expectation(cap, coeff_dim)


GALLERY: dict[str, GalleryEntry] = {
    "hardy-shift": GalleryEntry(_hardy_shift_example, {"cap": 5}, "truncated Hardy shift in one variable"),
    "dirichlet-shift": GalleryEntry(
        _dirichlet_shift_example, {"cap": 4, "mu": "lebesgue"}, "M_z on the one-variable D(mu)"
    ),
    "hardy-bidisc": GalleryEntry(_hardy_bidisc_example, {"cap": 4}, "(M_z1, M_z2) on the Hardy bidisc"),
    "dirichlet-pair": GalleryEntry(
        _dirichlet_pair_example,
        {"cap": 4, "mu1": "lebesgue", "mu2": "lebesgue"},
        "(M_z1, M_z2) on D(mu1, mu2)",
    ),
    "unitary": GalleryEntry(_unitary_example, {"d": 4}, "phase permutation unitary"),
    "unitary-pair": GalleryEntry(_unitary_pair_example, {"d": 2}, "commuting unitary pair U(x)I, I(x)U"),
    "scalar-2I": GalleryEntry(_scalar_example, {"d": 2}, "2 I, invertible but not 2-isometric"),
    "unitary-plus-shift": GalleryEntry(
        _unitary_plus_shift_example, {"d": 2, "cap": 3}, "unitary block plus Hardy shift block"
    ),
    "four-block": GalleryEntry(
        _four_block_example, {"d": 2, "cap": 3}, "direct sum realizing all four pair pieces"
    ),
    "eight-block": GalleryEntry(
        _eight_block_example, {"d": 1, "cap": 2}, "direct sum realizing all eight triple pieces"
    ),
    "triple-uss": GalleryEntry(_triple_uss_example, {"d": 2, "cap": 2}, "triple U(x)I(x)I, I(x)S(x)I, I(x)I(x)S"),
    "unitary-dirichlet": GalleryEntry(
        _unitary_dirichlet_example, {"d": 2, "cap": 4, "mu": "lebesgue"}, "U(x)I with I(x)M_z on D(mu)"
    ),
    "structural-mix": GalleryEntry(
        _structural_mix_example,
        {"d": 2, "cap": 3, "mu": "lebesgue", "nu1": "lebesgue", "nu2": "lebesgue"},
        "unitary pair plus unitary-Dirichlet pair plus Dirichlet shift pair",
    ),
    "bergman-pair": GalleryEntry(_bergman_pair_example, {"cap": 4}, "shifts on a Bergman-like Gram"),
    "perturbed-pair": GalleryEntry(
        _perturbed_pair_example, {"cap": 4, "eps": 0.1}, "M_z1 with M_z2 + eps M_z1 on the Hardy bidisc"
    ),
    "random-atom-pair": GalleryEntry(
        _random_atom_pair_example, {"cap": 5, "seed": 0, "coeff_dim": 1}, "model pair with random atom measures"
    ),
}


def _coerce(name: str, params: dict[str, ParamValue], defaults: dict[str, ParamValue]) -> dict[str, ParamValue]:
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise InputError(f"example {name!r} has no parameters {unknown}")
    merged: dict[str, ParamValue] = {}
    for key, default in defaults.items():
        value = params.get(key, default)
        try:
            merged[key] = type(default)(value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"parameter {key}={value!r} is not a {type(default).__name__}") from exc
    return merged


def make_example(spec: ExampleSpec | str) -> Example:
    if isinstance(spec, str):
        spec = ExampleSpec(name=spec)
    entry = GALLERY.get(spec.name)
    if entry is None:
        raise UnknownExample(f"{spec.name!r} is not in the gallery ({', '.join(sorted(GALLERY))})")
    params = _coerce(spec.name, spec.params, entry.defaults)
    operators, expectation = entry.builder(**params)
    LOGGER.debug("built %s with %s", spec.name, params)
    return Example(spec.name, params, tuple(operators), expectation)
