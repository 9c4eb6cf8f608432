"""Command-line front end: parse and print rule files, evaluate operators,
dump window matrices, certify nilpotency and traces, verify decompositions,
run the randomized trace-axiom suite, and replay the bundled counterexample.

Exit codes: 0 success, 2 usage or parse error, 3 computation could not
certify (image chain did not stabilize), 4 verification failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dsl import (
    NotSerializableError,
    OpSyntaxError,
    parse_path,
    parse_vector,
    print_operator,
    print_operators,
)
from .fields import field_from_spec
from .operators import window_matrix
from .repro import (
    PAPER_OPERATOR_KEYS,
    BundleError,
    build_paper_bundle,
    paper_ast_claim,
    paper_operator,
    verify_paper,
)
from .tate import (
    ASTClaim,
    DEFAULT_MAX_POWER,
    DEFAULT_NILPOTENCY_WINDOW,
    DEFAULT_TRACE_WINDOW,
    NotStabilizedError,
    axiom_suite,
    check_nilpotent,
    find_trace,
    image_chain,
    verify_ast,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNCERTIFIED = 3
EXIT_FAIL = 4

_FIELD_ENV = "FPT_DEFAULT_FIELD"
_FORMATS = ("ascii", "json", "csv")


class CliError(Exception):
    """Fatal command error carrying its intended process exit code."""

    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Argument plumbing.
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--field",
        default=None,
        help="scalar field: 'rationals' (default) or 'p:PRIME'; "
             f"the {_FIELD_ENV} environment variable overrides the default",
    )
    common.add_argument("--format", choices=_FORMATS, default="ascii",
                        help="output format (default ascii)")
    common.add_argument("--out", metavar="FILE", default=None,
                        help="write output to FILE instead of stdout")

    parser = argparse.ArgumentParser(
        prog="fpt",
        description="Exact trace calculator for rule-defined finite-potent operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("parse", parents=[common],
                       help="parse a rule file and echo its normalized form")
    p.add_argument("file", help="rule file (.op)")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("print", parents=[common],
                       help="print one operator in normalized rule text")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.set_defaults(func=_cmd_print)

    p = sub.add_parser("apply", parents=[common],
                       help="apply an operator to a basis vector or a vector literal")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("vector",
                   help="basis index (e.g. 7) or vector literal (e.g. 'v[1] - 2*v[3]')")
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("matrix", parents=[common],
                       help="dump the N x N window matrix of an operator")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("--window", type=int, default=9, metavar="N",
                   help="window size N (default 9)")
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("nilpotent", parents=[common],
                       help="find the least power that kills every window basis vector")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("--window", type=int, default=DEFAULT_NILPOTENCY_WINDOW,
                   metavar="N", help=f"window size (default {DEFAULT_NILPOTENCY_WINDOW})")
    p.add_argument("--max-power", type=int, default=DEFAULT_MAX_POWER, metavar="P",
                   help=f"largest power to try (default {DEFAULT_MAX_POWER})")
    p.set_defaults(func=_cmd_nilpotent)

    p = sub.add_parser("chain", parents=[common],
                       help="dimensions of the iterated image spans on a window")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("--window", type=int, default=DEFAULT_TRACE_WINDOW, metavar="N",
                   help=f"window size (default {DEFAULT_TRACE_WINDOW})")
    p.add_argument("--max-power", type=int, default=DEFAULT_MAX_POWER, metavar="P",
                   help=f"number of powers (default {DEFAULT_MAX_POWER})")
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("trace", parents=[common],
                       help="stabilize the image chain and take the core trace")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("--window", type=int, default=DEFAULT_TRACE_WINDOW, metavar="N",
                   help=f"window size (default {DEFAULT_TRACE_WINDOW})")
    p.add_argument("--probe", type=int, default=None, metavar="M",
                   help="probe width beyond the window (default: derived from the rules)")
    p.add_argument("--max-power", type=int, default=DEFAULT_MAX_POWER, metavar="P",
                   help=f"largest power to try (default {DEFAULT_MAX_POWER})")
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("ast-verify", parents=[common],
                       help="verify a claimed core/nilpotent splitting")
    p.add_argument("opref", help="FILE[:NAME] or paper:NAME")
    p.add_argument("--w", action="append", default=None, metavar="VEC",
                   help="core basis vector literal (repeatable); "
                        "defaults to the bundled claim for paper:phi")
    p.add_argument("--u-threshold", type=int, default=None, metavar="T",
                   help="tail starts at basis index T")
    p.add_argument("--nilpotency-order", type=int, default=None, metavar="Q",
                   help="claimed exact nilpotency order on the tail")
    p.add_argument("--window", type=int, default=DEFAULT_TRACE_WINDOW, metavar="N",
                   help=f"window size (default {DEFAULT_TRACE_WINDOW})")
    p.set_defaults(func=_cmd_ast_verify)

    p = sub.add_parser("axioms", parents=[common],
                       help="randomized exact checks of the five trace properties")
    p.add_argument("--trials", type=int, default=100, metavar="T",
                   help="trials per property (default 100)")
    p.add_argument("--max-dim", type=int, default=8, metavar="D",
                   help="largest random dimension (default 8)")
    p.add_argument("--seed", type=int, default=0, metavar="S",
                   help="random seed (default 0)")
    p.set_defaults(func=_cmd_axioms)

    p = sub.add_parser("verify-paper", parents=[common],
                       help="replay every bundled counterexample claim and report a verdict")
    p.add_argument("--theta2", metavar="FILE", default=None,
                   help="substitute rule text for theta2_v from FILE")
    p.add_argument("--window", type=int, default=DEFAULT_TRACE_WINDOW, metavar="N",
                   help=f"trace/matrix window (default {DEFAULT_TRACE_WINDOW})")
    p.add_argument("--nilpotency-window", type=int,
                   default=DEFAULT_NILPOTENCY_WINDOW, metavar="N",
                   help=f"nilpotency window (default {DEFAULT_NILPOTENCY_WINDOW})")
    p.add_argument("--max-power", type=int, default=DEFAULT_MAX_POWER, metavar="P",
                   help=f"largest power to try (default {DEFAULT_MAX_POWER})")
    p.add_argument("--probe", type=int, default=None, metavar="M",
                   help="probe width (default: derived from the rules)")
    p.set_defaults(func=_cmd_verify_paper)

    return parser


def _resolve_field(args):
    selector = args.field
    if selector is None:
        selector = os.environ.get(_FIELD_ENV) or "rationals"
    try:
        return field_from_spec(selector)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _resolve_opref(ref: str, field):
    if ref.startswith("paper:"):
        key = ref[len("paper:"):]
        try:
            return paper_operator(key, field)
        except KeyError:
            known = ", ".join(f"paper:{k}" for k in PAPER_OPERATOR_KEYS)
            raise CliError(f"unknown bundled operator {ref!r} (known: {known})") from None
    if os.path.exists(ref):
        path, name = ref, None
    elif ":" in ref:
        path, _, name = ref.rpartition(":")
    else:
        path, name = ref, None
    try:
        ops = parse_path(path, field)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    if name is None:
        if len(ops) == 1:
            return ops[0]
        names = ", ".join(op.name for op in ops)
        raise CliError(
            f"{path} defines {len(ops)} operators ({names}); select one as {path}:NAME")
    for op in ops:
        if op.name == name:
            return op
    names = ", ".join(op.name for op in ops)
    raise CliError(f"{path} has no operator named {name!r} (found: {names})")


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _emit_json(args, payload) -> None:
    _emit(args, json.dumps(payload, indent=2, sort_keys=True))


def _reject_csv(args, command: str) -> None:
    if args.format == "csv":
        raise CliError(f"--format csv is not supported for {command!r}")


def _ascii_matrix(matrix) -> str:
    rows = matrix.to_str_rows()
    if not rows or not rows[0]:
        return "(empty matrix)"
    widths = [max(len(rows[r][c]) for r in range(len(rows)))
              for c in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(width) for cell, width in zip(row, widths)))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------


def _cmd_parse(args, field) -> int:
    _reject_csv(args, "parse")
    try:
        ops = parse_path(args.file, field)
    except FileNotFoundError:
        raise CliError(f"no such file: {args.file}") from None
    try:
        normalized = print_operators(ops)
    except NotSerializableError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        _emit_json(args, {
            "file": args.file,
            "field": field.selector,
            "operators": [
                {"name": op.name, "basis": op.basis_name, "reach": op.reach}
                for op in ops
            ],
            "normalized": normalized,
        })
    else:
        _emit(args, normalized)
    return EXIT_OK


def _cmd_print(args, field) -> int:
    _reject_csv(args, "print")
    op = _resolve_opref(args.opref, field)
    try:
        text = print_operator(op)
    except NotSerializableError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        _emit_json(args, {"name": op.name, "basis": op.basis_name,
                          "field": field.selector, "normalized": text})
    else:
        _emit(args, text)
    return EXIT_OK


def _parse_vector_argument(text: str, field, basis_name: str):
    from .vectors import SparseVector

    stripped = text.strip()
    if stripped.lstrip("+-").isdigit():
        index = int(stripped)
        if index < 1:
            raise CliError(f"basis index must be >= 1, got {index}")
        return SparseVector.basis(field, index)
    try:
        return parse_vector(stripped, field, basis_name)
    except OpSyntaxError as exc:
        raise CliError(f"bad vector {text!r}: {exc}") from exc


def _cmd_apply(args, field) -> int:
    op = _resolve_opref(args.opref, field)
    vector = _parse_vector_argument(args.vector, field, op.basis_name)
    image = op.apply(vector)
    if args.format == "json":
        _emit_json(args, {
            "operator": op.name,
            "field": field.selector,
            "input": vector.to_pairs(),
            "image": image.to_pairs(),
            "image_text": image.to_text(op.basis_name),
        })
    elif args.format == "csv":
        lines = ["index,coefficient"]
        lines += [f"{idx},{coeff}" for idx, coeff in image.to_pairs()]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, image.to_text(op.basis_name))
    return EXIT_OK


def _cmd_matrix(args, field) -> int:
    if args.window < 1:
        raise CliError("--window must be >= 1")
    op = _resolve_opref(args.opref, field)
    matrix = window_matrix(op, args.window, args.window)
    if args.format == "json":
        _emit_json(args, {
            "operator": op.name,
            "field": field.selector,
            "rows": args.window,
            "cols": args.window,
            "matrix": matrix.to_str_rows(),
        })
    elif args.format == "csv":
        _emit(args, "\n".join(",".join(row) for row in matrix.to_str_rows()))
    else:
        _emit(args, _ascii_matrix(matrix))
    return EXIT_OK


def _cmd_nilpotent(args, field) -> int:
    _reject_csv(args, "nilpotent")
    if args.window < 1 or args.max_power < 1:
        raise CliError("--window and --max-power must be >= 1")
    op = _resolve_opref(args.opref, field)
    report = check_nilpotent(op, args.max_power, args.window)
    if args.format == "json":
        _emit_json(args, report.to_json_dict())
    elif report.ok:
        witness = ("(zero operator, no witness)" if report.witness_index is None
                   else f"witness {op.basis_name}[{report.witness_index}]")
        _emit(args, f"{op.name}: nilpotent of order {report.order} "
                    f"on indices 1..{args.window}, {witness}")
    else:
        _emit(args, f"{op.name}: power {args.max_power} is still nonzero at "
                    f"index {report.failure_index} (window {args.window})")
    return EXIT_OK if report.ok else EXIT_UNCERTIFIED


def _cmd_chain(args, field) -> int:
    if args.window < 1 or args.max_power < 1:
        raise CliError("--window and --max-power must be >= 1")
    op = _resolve_opref(args.opref, field)
    chain = image_chain(op, args.max_power, args.window)
    dims = [subspace.dim for subspace in chain]
    if args.format == "json":
        _emit_json(args, {
            "operator": op.name,
            "field": field.selector,
            "window": args.window,
            "max_power": args.max_power,
            "chain_dims": dims,
        })
    elif args.format == "csv":
        lines = ["power,dim"] + [f"{n + 1},{dim}" for n, dim in enumerate(dims)]
        _emit(args, "\n".join(lines))
    else:
        lines = [f"n={n + 1}: dim {dim}" for n, dim in enumerate(dims)]
        _emit(args, "\n".join(lines))
    return EXIT_OK


def _cmd_trace(args, field) -> int:
    _reject_csv(args, "trace")
    if args.window < 1 or args.max_power < 1:
        raise CliError("--window and --max-power must be >= 1")
    if args.probe is not None and args.probe < 1:
        raise CliError("--probe must be >= 1")
    op = _resolve_opref(args.opref, field)
    cert = find_trace(op, max_power=args.max_power, window=args.window,
                      probe=args.probe)
    if args.format == "json":
        _emit_json(args, cert.to_json_dict())
    else:
        _emit(args, f"{op.name}: trace {field.to_str(cert.trace)} "
                    f"(power {cert.power}, core dimension {cert.core.dim}, "
                    f"chain dims {cert.chain_dims}, window {cert.window}, "
                    f"probe {cert.probe}, {cert.status})")
    return EXIT_OK


def _cmd_ast_verify(args, field) -> int:
    _reject_csv(args, "ast-verify")
    if args.window < 1:
        raise CliError("--window must be >= 1")
    op = _resolve_opref(args.opref, field)
    if args.w is None:
        if args.opref == "paper:phi":
            claim = paper_ast_claim(field)
            if args.u_threshold is not None or args.nilpotency_order is not None:
                claim = ASTClaim(
                    claim.w_basis,
                    args.u_threshold if args.u_threshold is not None else claim.u_threshold,
                    args.nilpotency_order if args.nilpotency_order is not None
                    else claim.nilpotency_order,
                )
        else:
            raise CliError(
                "ast-verify needs a claimed core: pass --w VEC (repeatable), "
                "--u-threshold and --nilpotency-order")
    else:
        if args.u_threshold is None or args.nilpotency_order is None:
            raise CliError("--w requires --u-threshold and --nilpotency-order")
        w_basis = [_parse_vector_argument(text, field, op.basis_name)
                   for text in args.w]
        try:
            claim = ASTClaim(w_basis, args.u_threshold, args.nilpotency_order)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    try:
        report = verify_ast(op, claim, window=args.window)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        _emit_json(args, report.to_json_dict())
    else:
        lines = []
        for name, passed, detail in report.checks:
            flag = "PASS" if passed else "FAIL"
            lines.append(f"[{flag}] {name}: {detail}")
        verdict = "PASS" if report.all_passed else "FAIL"
        lines.append(f"verdict: {verdict}")
        _emit(args, "\n".join(lines))
    return EXIT_OK if report.all_passed else EXIT_FAIL


def _cmd_axioms(args, field) -> int:
    _reject_csv(args, "axioms")
    if args.trials < 1 or args.max_dim < 2:
        raise CliError("--trials must be >= 1 and --max-dim >= 2")
    report = axiom_suite(field, seed=args.seed, trials=args.trials,
                         max_dim=args.max_dim)
    if args.format == "json":
        _emit_json(args, report.to_json_dict())
    else:
        lines = [f"field {field.selector}, seed {args.seed}, "
                 f"{args.trials} trials, max dimension {args.max_dim}"]
        for name in report.PROPERTY_NAMES:
            count = len(report.properties[name])
            flag = "PASS" if count == 0 else "FAIL"
            lines.append(f"[{flag}] {name}: {count} failures")
        lines.append(f"total failures: {report.total_failures}")
        _emit(args, "\n".join(lines))
    return EXIT_OK if report.total_failures == 0 else EXIT_FAIL


def _cmd_verify_paper(args, field) -> int:
    _reject_csv(args, "verify-paper")
    if args.window < 1 or args.nilpotency_window < 1 or args.max_power < 1:
        raise CliError("--window, --nilpotency-window and --max-power must be >= 1")
    theta2_text = None
    if args.theta2 is not None:
        try:
            with open(args.theta2, "r", encoding="utf-8") as handle:
                theta2_text = handle.read()
        except FileNotFoundError:
            raise CliError(f"no such file: {args.theta2}") from None
    bundle = build_paper_bundle(field, theta2_text=theta2_text)
    report = verify_paper(bundle, args.window,
                          nilpotency_window=args.nilpotency_window,
                          max_power=args.max_power, probe=args.probe)
    if args.format == "json":
        _emit_json(args, report.to_json_dict())
    else:
        lines = []
        if report.theta2_overridden:
            lines.append(f"note: theta2_v substituted from {args.theta2}")
        if report.reduced_confidence:
            for reason in report.reduced_confidence_reasons:
                lines.append(f"note: reduced confidence: {reason}")
        for step in report.steps:
            flag = "PASS" if step.passed else "FAIL"
            lines.append(f"[{flag}] stage {step.stage} {step.name}: {step.detail}")
        t = report.traces
        lines.append(
            f"traces: tr(theta1) = {t['theta1']}, tr(theta2) = {t['theta2']}, "
            f"tr(theta1 + theta2) = {t['phi']}")
        lines.append(f"verdict: {report.verdict}")
        _emit(args, "\n".join(lines))
    if report.verdict == "PASS":
        return EXIT_OK
    # A definite refutation outranks certification gaps: exit 3 only when
    # every failed step is merely undecided.
    if report.definite_failures():
        return EXIT_FAIL
    return EXIT_UNCERTIFIED


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        field = _resolve_field(args)
        return args.func(args, field)
    except CliError as exc:
        print(f"fpt: error: {exc}", file=sys.stderr)
        return exc.code
    except OpSyntaxError as exc:
        print(f"fpt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotStabilizedError as exc:
        print(f"fpt: not certified: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except BundleError as exc:
        print(f"fpt: bundle error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"fpt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
