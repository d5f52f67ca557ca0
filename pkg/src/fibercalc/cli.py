"""Command-line interface.

Exit status: 0 on success or a granted certificate, 1 on a refused
certificate, 2 on any input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .catalog import (
    CatalogEntry,
    CatalogError,
    catalog_list,
    catalog_load,
    catalog_store,
    default_catalog_dir,
)
from .certify import (
    Certificate,
    FamilySpec,
    certify_noncomplex,
    generate_family,
)
from .construct import (
    BlockSpec,
    StabilizationReport,
    build_block,
    horizontal_stabilize,
    vertical_stabilize,
)
from .invariants import Fibration, FibrationError, invariant_report
from .linalg import IntMatrix, LinalgError
from .monodromy import CurveClass, MonodromyError, SpElement, verify_homological_relation
from .serialize import (
    dumps,
    emit_fibration,
    fibration_to_dict,
    parse_fibration,
    report_to_dict,
)

EXIT_OK, EXIT_REFUSED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InputError(f"{self.prog}: {message}")


@dataclass
class CommandResult:
    status: int
    stdout: str = ""
    stderr: str = ""


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _load_input(ref: str, catalog: Path) -> Fibration:
    p = Path(ref)
    if p.is_file():
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {ref}: {exc}") from None
        return parse_fibration(text)
    if os.sep in ref or ref.endswith((".json", ".fib")):
        raise InputError(f"no such file: {ref}")
    return catalog_load(ref, catalog).fibration


def _csv_vector(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _read_matrix(path: str) -> IntMatrix:
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
        return IntMatrix.from_rows([[int(x) for x in r] for r in rows])
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"cannot read twist matrix {path}: {exc}") from None


def _report_lines(f: Fibration) -> list[str]:
    rep = invariant_report(f)
    lines = [
        f"name: {f.name or '-'}",
        f"kind: {f.kind.value}, fiber genus {f.fiber_genus}, base genus {f.base_genus}",
        f"euler: {rep.euler}",
        f"signature: {rep.signature if rep.signature is not None else 'undeclared'}",
    ]
    if rep.h1_unknown is None:
        lines += [f"H_1: {rep.h1}", f"b1: {rep.b1}", f"b2: {rep.b2}"]
    else:
        u = rep.h1_unknown
        lines += [
            f"H_1: U' + {rep.h1} (U' undetermined: {u.tag}, rank deficit {u.rank_deficit})",
            f"b1: parity {rep.b1_parity}, at least {rep.b1_lower_bound}",
            f"b2: at least {rep.b2_lower_bound}",
        ]
    lines.append(f"minimality: {rep.minimality_basis.value}")
    return lines


def _certificate_lines(c: Certificate) -> list[str]:
    lines = [f"certificate: {c.kind}", f"subject: {c.subject}"]
    for p in c.premises:
        ev = ", ".join(f"{k}={v}" for k, v in sorted(p.evidence.items()))
        lines.append(f"  [{'ok' if p.holds else 'FAIL'}] {p.condition} ({ev}) -- {p.rule}")
    lines.append(f"status: {c.status}" + (f" ({c.reason})" if c.reason else ""))
    if c.granted:
        lines.append(f"conclusion: {c.conclusion}")
    return lines


def stabilization_to_dict(r: StabilizationReport) -> dict:
    def grp(g):
        return str(g) if g is not None else None

    return {
        "operation": r.operation,
        "path": r.path,
        "route": r.route,
        "gluing": r.gluing,
        "selected_curves": [[str(x) for x in c.klass] for c in r.selected_curves],
        "kernel_dim": r.kernel_dim,
        "b1_before": r.b1_before,
        "b1_partner": r.b1_partner,
        "b1_after": r.b1_after,
        "b1_parity_after": r.b1_parity_after,
        "sigma_before": r.sigma_before,
        "sigma_after": r.sigma_after,
        "euler_after": r.euler_after,
        "h1_after": grp(r.h1_after),
        "h1_presentation": grp(r.h1_presentation),
        "h1_cokernel": grp(r.h1_cokernel),
        "torsion_after": list(r.torsion_after),
        "cross_check": r.cross_check,
        "closed_forms": dict(sorted(r.closed_forms.items())),
        "result": fibration_to_dict(r.result),
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_invariants(args) -> CommandResult:
    f = _load_input(args.file, args.catalog)
    if args.json:
        doc = {"name": f.name, "report": report_to_dict(invariant_report(f))}
        return CommandResult(EXIT_OK, dumps(doc))
    return CommandResult(EXIT_OK, "\n".join(_report_lines(f)) + "\n")


def _cmd_check(args) -> CommandResult:
    f = _load_input(args.file, args.catalog)
    if f.is_explicit:
        msg = verify_homological_relation(f.body).message
    else:
        msg = "declared invariants are consistent"
    if args.json:
        return CommandResult(EXIT_OK, dumps({"name": f.name, "valid": True, "message": msg}))
    return CommandResult(EXIT_OK, f"valid: {msg}\n")


def _cmd_certify(args) -> CommandResult:
    f = _load_input(args.file, args.catalog)
    c = certify_noncomplex(f)
    status = EXIT_OK if c.granted else EXIT_REFUSED
    if args.json:
        return CommandResult(status, dumps(c.to_dict()))
    return CommandResult(status, "\n".join(_certificate_lines(c)) + "\n")


def _cmd_build_block(args) -> CommandResult:
    a = CurveClass(args.g, _csv_vector(args.a, "--a")) if args.a else None
    b = CurveClass(args.g, _csv_vector(args.b, "--b")) if args.b else None
    f = build_block(BlockSpec(args.family, args.g, args.h, args.m, a, b))
    text = emit_fibration(f)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return CommandResult(EXIT_OK, f"wrote {args.output}\n")
    return CommandResult(EXIT_OK, text)


def _cmd_stabilize(args) -> CommandResult:
    f = _load_input(args.input, args.catalog)
    if args.direction == "horizontal":
        if args.partner_h is None:
            raise InputError("stabilize horizontal: --partner-h is required")
        twist = None
        if args.twist:
            twist = SpElement(f.fiber_genus, _read_matrix(args.twist))
        r = horizontal_stabilize(f, args.partner_h, args.m, twist)
    else:
        if args.partner_g is None:
            raise InputError("stabilize vertical: --partner-g is required")
        r = vertical_stabilize(f, args.partner_g, args.m)
    if args.output:
        Path(args.output).write_text(emit_fibration(r.result), encoding="utf-8")
    if args.json:
        return CommandResult(EXIT_OK, dumps(stabilization_to_dict(r)))
    lines = [
        f"operation: {r.operation} ({r.path})",
        f"selected curves: {[list(c.klass) for c in r.selected_curves]}",
        f"kernel dimension: {r.kernel_dim}",
        f"b1: {r.b1_before} -> {r.b1_after if r.b1_after is not None else 'parity ' + str(r.b1_parity_after)}",
        f"signature: {r.sigma_before} -> {r.sigma_after}",
        f"H_1 after: {r.h1_after}",
        f"route: {r.route}, cross-check: {r.cross_check}, gluing: {r.gluing}",
    ]
    for k, v in sorted(r.closed_forms.items()):
        lines.append(f"closed form {k} = {v}")
    lines += _report_lines(r.result)
    return CommandResult(EXIT_OK, "\n".join(lines) + "\n")


def _cmd_family(args) -> CommandResult:
    spec = FamilySpec(
        args.mode, g=args.g, h=args.h, n=args.n, count=args.count, m_start=args.m_start, seed=args.seed
    )
    members = generate_family(spec, args.catalog)
    all_granted = all(m.noncomplex.granted and m.distinct.granted for m in members)
    status = EXIT_OK if all_granted else EXIT_REFUSED
    if args.json:
        doc = {
            "mode": spec.mode,
            "members": [
                {
                    "m": m.m,
                    "fibration": fibration_to_dict(m.fibration),
                    "report": report_to_dict(invariant_report(m.fibration)),
                    "noncomplex": m.noncomplex.to_dict(),
                    "distinct": m.distinct.to_dict(),
                }
                for m in members
            ],
        }
        return CommandResult(status, dumps(doc))
    lines = [f"family {spec.mode}: {len(members)} members"]
    for m in members:
        rep = invariant_report(m.fibration)
        h1 = str(rep.h1) if rep.h1_unknown is None else f"U' + {rep.h1}"
        lines.append(
            f"m={m.m}: g={m.fibration.fiber_genus} h={m.fibration.base_genus} "
            f"sigma={rep.signature} e={rep.euler} H_1={h1} "
            f"noncomplex={m.noncomplex.status} distinct={m.distinct.status}"
        )
    return CommandResult(status, "\n".join(lines) + "\n")


def _cmd_catalog(args) -> CommandResult:
    if args.action == "list":
        items = catalog_list(args.catalog)
        if args.json:
            return CommandResult(EXIT_OK, dumps([{"id": i, "provenance": p} for i, p in items]))
        return CommandResult(EXIT_OK, "".join(f"{i}\t{p}\n" for i, p in items))
    if args.action == "show":
        if not args.id:
            raise InputError("catalog show: an entry id is required")
        e = catalog_load(args.id, args.catalog)
        err = f"warning: {e.mismatch}\n" if e.mismatch else ""
        if args.json:
            doc = {
                "id": e.id,
                "provenance": e.provenance,
                "fibration": fibration_to_dict(e.fibration),
                "report": e.report,
            }
            return CommandResult(EXIT_OK, dumps(doc), err)
        lines = [f"id: {e.id}", f"provenance: {e.provenance}"]
        if e.fibration.citation:
            lines.append(f"citation: {e.fibration.citation}")
        if not e.fibration.is_explicit and e.fibration.body.companion:
            lines.append(f"companion fibration genera: {e.fibration.body.companion}")
        try:
            lines += _report_lines(e.fibration)
        except FibrationError as exc:
            lines.append(f"invariants incomplete: {exc}")
        return CommandResult(EXIT_OK, "\n".join(lines) + "\n", err)
    if not args.id or not args.file:
        raise InputError("catalog add: an entry id and a file are required")
    f = _load_input(args.file, args.catalog)
    path = catalog_store(CatalogEntry(args.id, f), args.catalog)
    return CommandResult(EXIT_OK, f"stored {args.id} at {path}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fibercalc", description="Invariants of surface bundles and Lefschetz fibrations")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--catalog", type=Path, default=None, help="catalog directory")
    # the global flags are also accepted after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--catalog", type=Path, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    for name, fn, help_ in (
        ("invariants", _cmd_invariants, "compute e, signature, H_1, b1, b2"),
        ("check", _cmd_check, "validate a fibration file"),
        ("certify", _cmd_certify, "non-complexity certificate"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("file", help="fibration file or catalog id")
        s.set_defaults(func=fn)

    s = sub.add_parser("build-block", help="emit an elementary block P, Q_m or R_m")
    s.add_argument("--family", required=True, choices=["P", "Q", "R"])
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--a", help="class of curve a, comma-separated")
    s.add_argument("--b", help="class of curve b, comma-separated")
    s.add_argument("--output", "-o")
    s.set_defaults(func=_cmd_build_block)

    s = sub.add_parser("stabilize", help="horizontal or vertical stabilization")
    s.add_argument("direction", choices=["horizontal", "vertical"])
    s.add_argument("--input", required=True, help="fibration file or catalog id")
    s.add_argument("--partner-h", type=int)
    s.add_argument("--partner-g", type=int)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--twist", help="JSON file with a symplectic matrix")
    s.add_argument("--output", "-o", help="write the resulting fibration here")
    s.set_defaults(func=_cmd_stabilize)

    s = sub.add_parser("family", help="generate a certified family")
    s.add_argument("--mode", required=True, choices=["i", "ii", "iii"])
    s.add_argument("--g", type=int)
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--count", type=int, default=5)
    s.add_argument("--m-start", type=int, default=1)
    s.add_argument("--seed", help="catalog id overriding the default seed")
    s.set_defaults(func=_cmd_family)

    s = sub.add_parser("catalog", help="list, show or add catalog entries")
    s.add_argument("action", choices=["list", "show", "add"])
    s.add_argument("id", nargs="?")
    s.add_argument("file", nargs="?")
    s.set_defaults(func=_cmd_catalog)
    return p


def run_command(argv: Sequence[str]) -> CommandResult:
    try:
        args = build_parser().parse_args(list(argv))
        if args.catalog is None:
            args.catalog = default_catalog_dir()
        return args.func(args)
    except InputError as exc:
        return CommandResult(EXIT_INPUT, "", f"error: {exc}\n")
    except (FibrationError, MonodromyError, LinalgError, CatalogError, OSError) as exc:
        return CommandResult(EXIT_INPUT, "", f"error: {exc}\n")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        result = run_command(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    sys.stdout.write(result.stdout)
    sys.stderr.write(result.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
