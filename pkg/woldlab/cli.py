"""Command-line surface: ``woldlab decompose | check | model {build,recover,verify}``.

Reports go to stdout (or ``--output``); logs go to stderr. Exit codes are 0
when every check passes, 2 when a mathematical check fails, 3 for unusable
input and 4 for internal numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from woldlab.config import TolerancePolicy
from woldlab.dirichlet import model_space, recover_measure, verify_model_equivalence
from woldlab.errors import EmptyWanderingSubspace, InputError, SchemaError, WoldLabError
from woldlab.gallery import GALLERY
from woldlab.measures import parse_measure
from woldlab.operators import (
    DenseOperator,
    check_left_inverse_commuting,
    check_toral_two_isometry,
    check_two_isometry,
)
from woldlab.schema import (
    ErrorDocument,
    GalleryDocument,
    ReportDocument,
    encode_matrix,
    format_residual,
    load_operator_document,
    measure_payload,
    policy_echo,
    resolve_document,
)
from woldlab.subspaces import intersect, wandering_kernel
from woldlab.wold import dual_tuple, structural_decomposition_pair, wold_single, wold_tuple

LOGGER = logging.getLogger(__name__)

IDENTITIES = ("lic", "two-isometry", "toral", "all")
MODES = ("auto", "single", "tuple", "structural", "dual")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol-rank", type=float, default=None, help="Singular value cutoff (relative).")
    parser.add_argument("--tol-residual", type=float, default=None, help="Pass threshold for residuals.")
    parser.add_argument("--max-iter", type=int, default=None, help="Stabilization iteration cap.")
    parser.add_argument("--report", choices=("json", "text"), default="json")
    parser.add_argument("--output", type=Path, default=None, help="Write the report here instead of stdout.")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def _add_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--gallery", metavar="NAME", help=f"Registered example: {', '.join(sorted(GALLERY))}.")
    source.add_argument("--op", type=Path, help="Operator document (JSON).")
    parser.add_argument(
        "--param", action="append", default=[], metavar="KEY=VALUE", help="Gallery parameter override."
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized gallery entries.")


def _add_gallery_cap(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--cap",
        dest="gallery_cap",
        type=int,
        default=None,
        help="Truncation cap of a gallery entry that takes one (same as --param cap=N).",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="woldlab", description="Wold-type decompositions and Dirichlet models.")
    commands = parser.add_subparsers(dest="command", required=True)

    decompose = commands.add_parser("decompose", help="Single, tuple or structural decomposition.")
    _add_source(decompose)
    _add_gallery_cap(decompose)
    decompose.add_argument("--mode", choices=MODES, default="auto")
    decompose.add_argument("--force", action="store_true", help="Decompose even when prerequisites fail.")
    _add_common(decompose)

    check = commands.add_parser("check", help="Pointwise operator identities.")
    _add_source(check)
    _add_gallery_cap(check)
    check.add_argument("--identity", choices=IDENTITIES, default="all")
    check.add_argument(
        "--experimental-converse",
        action="store_true",
        help="Also report the left-inverse commuting residual of a toral pair (not gated).",
    )
    _add_common(check)

    model = commands.add_parser("model", help="Dirichlet-type model spaces.")
    actions = model.add_subparsers(dest="action", required=True)

    build = actions.add_parser("build", help="Assemble the model Gram for two measures.")
    build.add_argument("--mu1", required=True, help="zero | lebesgue[:scale] | atom:angle[:weight]")
    build.add_argument("--mu2", default=None, help="Second measure; omit for one variable.")
    build.add_argument("--cap", type=int, required=True)
    build.add_argument("--coeff-dim", type=int, default=1)
    build.add_argument("--dump-gram", type=Path, default=None, help="Write the Gram (.npy or .json).")
    _add_common(build)

    recover = actions.add_parser("recover", help="Recover measure coefficients from a 2-isometric tuple.")
    _add_source(recover)
    recover.add_argument("--window", type=int, default=None)
    _add_common(recover)

    verify = actions.add_parser("verify", help="Compare a pair with its recovered model.")
    _add_source(verify)
    verify.add_argument("--cap", type=int, default=None)
    _add_common(verify)
    return parser


def _policy(args: argparse.Namespace) -> TolerancePolicy:
    try:
        return TolerancePolicy.from_env(
            rank_tol=args.tol_rank, residual_tol=args.tol_residual, max_iter=args.max_iter
        )
    except ValidationError as exc:
        loc = exc.errors()[0]["loc"]
        raise SchemaError(exc.errors()[0]["msg"], "/policy/" + "/".join(map(str, loc))) from exc


def _gallery_params(args: argparse.Namespace) -> dict[str, str | int]:
    params: dict[str, str | int] = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects KEY=VALUE, got {item!r}")
        params[key.strip()] = value.strip()
    overrides = {"seed": args.seed, "cap": getattr(args, "gallery_cap", None)}
    entry = GALLERY.get(args.gallery)
    for key, value in overrides.items():
        if value is None:
            continue
        if entry is not None and key in entry.defaults:
            params[key] = value
        else:
            LOGGER.warning("%s takes no %s; ignoring --%s", args.gallery, key, key)
    return params


def _operators(args: argparse.Namespace, policy: TolerancePolicy) -> tuple[DenseOperator, ...]:
    if args.gallery is not None:
        doc = GalleryDocument(name=args.gallery, params=_gallery_params(args))
    else:
        doc = load_operator_document(args.op)
    operators, _ = resolve_document(doc, policy)
    return operators


def _residuals(values: dict[str, float]) -> dict[str, str]:
    return {key: format_residual(value) for key, value in values.items()}


def _report(argv: Sequence[str], policy: TolerancePolicy, passed: bool, **sections) -> ReportDocument:
    return ReportDocument(
        command=list(argv),
        policy=policy_echo(policy),
        passed=passed,
        exit_code=0 if passed else 2,
        **sections,
    )


def _decompose(args: argparse.Namespace, argv: Sequence[str], policy: TolerancePolicy) -> ReportDocument:
    ops = _operators(args, policy)
    mode = args.mode
    if mode == "auto":
        mode = "single" if len(ops) == 1 else "tuple"
    if mode == "dual" and len(ops) == 1:
        ops, mode = dual_tuple(ops, policy), "single"
    if mode == "single":
        dims, residuals, flags, passed = {}, {}, {}, True
        for i, T in enumerate(ops, start=1):
            report = wold_single(T, policy)
            prefix = f"T{i}." if len(ops) > 1 else ""
            dims[f"{prefix}h_inf"], dims[f"{prefix}wandering"] = report.dims
            residuals.update({f"{prefix}{k}": v for k, v in report.residuals.items()})
            flags[f"{prefix}truncation_limited"] = report.truncation_limited
            passed = passed and report.passed
        return _report(argv, policy, passed, dims=dims, residuals=_residuals(residuals), flags=flags)
    if mode == "structural":
        if len(ops) != 2:
            raise InputError("structural decomposition needs exactly two operators")
        report = structural_decomposition_pair(*ops, policy, force=args.force)
        residuals = {
            "off_diagonal": report.off_diagonal_residual,
            "completeness": report.completeness_residual,
            **{f"unitary.{k}": v for k, v in report.unitary_residuals.items()},
            **{f"model_gram.{k}": v for k, v in report.model_gram_residuals.items()},
        }
        measures = {k: measure_payload(mu) for k, mu in report.measures.items() if mu is not None}
        return _report(
            argv, policy, report.passed, dims=report.dims, residuals=_residuals(residuals), measures=measures
        )
    if len(ops) < 2:
        raise InputError(f"{mode} decomposition needs at least two operators")
    tuple_ops = dual_tuple(ops, policy) if mode == "dual" else ops
    report = wold_tuple(tuple_ops, policy, force=args.force)
    residuals = {"completeness": report.completeness_residual, "orthogonality": report.orthogonality_residual}
    for piece in report.pieces.values():
        for i, (u, r) in enumerate(zip(piece.unitary_residuals, piece.reducing_residuals), start=1):
            if piece.alpha[i - 1] == 0:
                residuals[f"{piece.label}.unitary.T{i}"] = u
            residuals[f"{piece.label}.reducing.T{i}"] = r
    if report.prerequisites is not None:
        residuals["lic"] = report.prerequisites.lic_residual
    flags = {"truncation_limited": any(single.truncation_limited for single in report.singles)}
    return _report(
        argv, policy, report.passed, pieces=report.dims, residuals=_residuals(residuals), flags=flags
    )


def _check(args: argparse.Namespace, argv: Sequence[str], policy: TolerancePolicy) -> ReportDocument:
    ops = _operators(args, policy)
    wanted = {"lic", "two-isometry", "toral"} if args.identity == "all" else {args.identity}
    if len(ops) == 1:
        if args.identity in ("lic", "toral"):
            raise InputError(f"--identity {args.identity} needs at least two operators")
        wanted = {"two-isometry"}
    residuals: dict[str, float] = {}
    gated: list[float] = []
    if "lic" in wanted:
        lic = check_left_inverse_commuting(ops, policy)
        for (i, j), value in lic.lic_residuals.items():
            residuals[f"lic[{i},{j}]"] = value
        for (i, j), value in lic.commutator_residuals.items():
            residuals[f"commutator[{i},{j}]"] = value
        gated += [lic.lic_residual, lic.commutator_residual]
    if "two-isometry" in wanted:
        for i, T in enumerate(ops, start=1):
            residuals[f"two_isometry[{i}]"] = check_two_isometry(T, policy)
            gated.append(residuals[f"two_isometry[{i}]"])
    if "toral" in wanted:
        toral = check_toral_two_isometry(ops[0], ops[1], policy)
        for (i, j), value in toral.residuals.items():
            residuals[f"toral[{i},{j}]"] = value
        residuals["toral.commutator"] = toral.commutator_residual
        gated.append(toral.residual)
        if args.experimental_converse and "lic" not in wanted:
            residuals["converse.lic"] = check_left_inverse_commuting(ops, policy).lic_residual
    passed = all(value < policy.residual_tol for value in gated)
    return _report(argv, policy, passed, residuals=_residuals(residuals))


def _dump_gram(path: Path, gram: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".npy":
        np.save(path, gram)
        return
    payload = {"schema": "woldlab/1", "shape": list(gram.shape), "entries": encode_matrix(gram)}
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    LOGGER.info("wrote gram of shape %s to %s", gram.shape, path)


def _model_build(args: argparse.Namespace, argv: Sequence[str], policy: TolerancePolicy) -> ReportDocument:
    window = max(args.cap - 1, 0)
    mu1 = parse_measure(args.mu1, window, args.coeff_dim)
    mu2 = parse_measure(args.mu2, window, args.coeff_dim) if args.mu2 is not None else None
    space = model_space(mu1, mu2, args.cap, policy)
    if args.dump_gram is not None:
        _dump_gram(args.dump_gram, space.gram)
    eigs = np.linalg.eigvalsh(space.gram)
    measures = {"mu1": measure_payload(mu1)}
    if mu2 is not None:
        measures["mu2"] = measure_payload(mu2)
    return _report(
        argv,
        policy,
        True,
        dims={"dim": space.dim, "cap": space.cap, "coeff_dim": space.coeff_dim},
        residuals=_residuals({"min_eigenvalue": eigs[0], "max_eigenvalue": eigs[-1]}),
        measures=measures,
    )


def _model_recover(args: argparse.Namespace, argv: Sequence[str], policy: TolerancePolicy) -> ReportDocument:
    ops = _operators(args, policy)
    if len(ops) > 2:
        raise InputError("measure recovery takes one operator or a pair")
    kernels = [wandering_kernel(T, policy) for T in ops]
    E = kernels[0] if len(ops) == 1 else intersect(*kernels)
    if E.is_zero:
        raise EmptyWanderingSubspace("no wandering vectors to recover a measure from")
    window = args.window
    if window is None:
        headroom = E.headroom()
        if not np.isfinite(headroom):
            raise InputError("--window is required on spaces without a degree grading")
        window = int(headroom) - 1
    names = ("mu",) if len(ops) == 1 else ("mu1", "mu2")
    measures = {name: measure_payload(recover_measure(T, E, window, policy)) for name, T in zip(names, ops)}
    return _report(argv, policy, True, dims={"E": E.dim, "window": window}, measures=measures)


def _model_verify(args: argparse.Namespace, argv: Sequence[str], policy: TolerancePolicy) -> ReportDocument:
    ops = _operators(args, policy)
    if len(ops) != 2:
        raise InputError("model verification needs exactly two operators")
    report = verify_model_equivalence(ops[0], ops[1], cap=args.cap, policy=policy, force=True)
    residuals = {
        "gram": report.gram_residual,
        "intertwining": report.intertwining_residual,
        "separation": report.separation_residual,
        "lic": report.lic_residual,
        "toral": report.toral_residual,
        "dictionary_min_eigenvalue": report.dictionary_min_eigenvalue,
    }
    return _report(
        argv,
        policy,
        report.passed,
        dims={"cap": report.cap, "coeff_dim": report.coeff_dim},
        residuals=_residuals(residuals),
        flags={
            "prerequisites_passed": report.prerequisites_passed,
            "dictionary_full_rank": report.dictionary_full_rank,
        },
        measures={"mu1": measure_payload(report.recovered_mu1), "mu2": measure_payload(report.recovered_mu2)},
    )


def _error_report(argv: Sequence[str], exc: WoldLabError, policy: TolerancePolicy | None) -> ReportDocument:
    return ReportDocument(
        command=list(argv),
        policy=policy_echo(policy or TolerancePolicy()),
        passed=False,
        exit_code=exc.exit_code,
        error=ErrorDocument(type=type(exc).__name__, message=str(exc), pointer=getattr(exc, "pointer", None)),
    )


def render_text(report: ReportDocument) -> str:
    """Plain tables for terminals."""
    lines = [f"{' '.join(report.command)}: {'PASS' if report.passed else 'FAIL'} (exit {report.exit_code})"]
    if report.error is not None:
        lines.append(f"{report.error.type}: {report.error.message}")
    for title, table in (("dims", report.dims), ("pieces", report.pieces), ("residuals", report.residuals)):
        if table:
            frame = pd.DataFrame({"value": pd.Series(table)})
            frame.index.name = title
            lines.append(frame.to_string())
    for name, coefficients in report.measures.items():
        rows = {f"mu_hat({k})": [complex(re, im) for re, im in block] for k, block in enumerate(coefficients)}
        lines.append(f"{name}:\n" + pd.Series(rows).to_string())
    return "\n".join(lines) + "\n"


def _emit(report: ReportDocument, args: argparse.Namespace) -> None:
    text = report.to_json() if args.report == "json" else render_text(report)
    if args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


HANDLERS = {
    ("decompose", None): _decompose,
    ("check", None): _check,
    ("model", "build"): _model_build,
    ("model", "recover"): _model_recover,
    ("model", "verify"): _model_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    handler = HANDLERS[(args.command, getattr(args, "action", None))]
    policy = None
    try:
        policy = _policy(args)
        report = handler(args, argv, policy)
    except WoldLabError as exc:
        LOGGER.log(logging.WARNING if exc.exit_code == 2 else logging.ERROR, "%s: %s", type(exc).__name__, exc)
        report = _error_report(argv, exc, policy)
    _emit(report, args)
    return report.exit_code


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
