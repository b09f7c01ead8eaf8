"""heightlab command line.

    heightlab height --curve "0,0,1,-1,0" --point "0;0" --prec 96
    heightlab local-heights --curve 37a --point "2;-3" --prime 5 --m 12
    heightlab constants --curve cm1728
    heightlab bound --curve "0,0,0,-1,0" --field "Q(i)"
    heightlab verify-lemmas --suite all --budget desk
    heightlab survey --curve "0,0,0,-1,0" --field "Q(i)" --box 20 --format csv
    heightlab replay run.manifest.json

Exit status: 0 when every check passes, 1 when some check fails, 2 on usage
or parse errors. --manifest PATH records the canonical inputs and a digest
of the report; `replay` re-runs it and compares digests.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .arith.balls import DEFAULT_PREC
from .arith.padic import place_structure
from .bounds.constants import BASE_FIELDS, _cm_field, bound_certificate, elkies_constant, verify_admissible
from .bounds.survey import SURVEY_COLUMNS, SurveyFamily, height_floor_survey
from .bounds.theorem2 import theorem2_constants
from .corpus import corpus_entry, load_corpus
from .curves.reduction import bad_primes, reduction_data
from .curves.weierstrass import CurvePoint, WeierstrassCurve, format_element, parse_curve, parse_point
from .errors import CorpusError, HeightlabError, InvalidPlace, NoAdmissiblePrime, RamifiedUnsupported
from .heights.local import canonical_height_local_sum, lambda_nonarch, lambda_nonarch_place
from .heights.parallelogram import canonical_height
from .report import digest, emit_report, load_manifest, make_manifest
from .suites import BUDGETS, SUITES, run_suites

COMMANDS = ("constants", "height", "local-heights", "bound", "verify-lemmas", "survey", "replay")
SUITE_CHOICES = tuple(SUITES) + ("all",)
PREC_ENV = "HEIGHTLAB_PREC"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--curve", help="a-invariants 'a1,a2,a3,a4,a6' (or 'a4,a6') or a corpus label")
    p.add_argument("--point", action="append", default=[], help="'x;y' or 'O'; repeatable")
    p.add_argument("--prime", action="append", type=int, default=[], help="repeatable")
    p.add_argument("--m", type=int, help="conductor of the cyclotomic base change")
    p.add_argument("--field", default="Q", choices=sorted(BASE_FIELDS), help="base field K")
    p.add_argument("--box", type=int, help="survey box B")
    p.add_argument("--prec", type=int, help=f"working precision in bits (env {PREC_ENV}, default {DEFAULT_PREC})")
    p.add_argument("--budget", default="desk", choices=sorted(BUDGETS))
    p.add_argument("--format", default="json", choices=("json", "csv", "text"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--manifest", help="write an experiment manifest here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heightlab", description="Canonical heights and explicit lower bounds on elliptic curves.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS[:-1]:
        sp = sub.add_parser(name)
        _common(sp)
        if name == "verify-lemmas":
            sp.add_argument("--suite", action="append", choices=SUITE_CHOICES)
    rp = sub.add_parser("replay", help="re-run a manifest and compare the report digest")
    rp.add_argument("manifest_path")
    rp.add_argument("--out")
    return parser


# -- argument resolution ---------------------------------------------------------


def resolve_curve(text: Optional[str]) -> WeierstrassCurve:
    if not text:
        raise UsageError("--curve is required")
    if "," in text:
        try:
            return parse_curve(text)
        except (ValueError, HeightlabError) as exc:
            raise UsageError(f"bad --curve: {exc}") from None
    try:
        return corpus_entry(text).curve
    except (KeyError, CorpusError) as exc:
        labels = ", ".join(e.label for e in load_corpus())
        raise UsageError(f"unknown curve label {text!r}; give a-invariants or one of: {labels}") from exc


def resolve_points(curve: WeierstrassCurve, texts: Sequence[str], required: bool = True) -> list[CurvePoint]:
    if required and not texts:
        raise UsageError("--point is required")
    out = []
    for t in texts:
        try:
            out.append(parse_point(curve, t))
        except (ValueError, HeightlabError) as exc:
            raise UsageError(f"bad --point {t!r}: {exc}") from None
    return out


def resolve_precision(value: Optional[int]) -> int:
    if value is None:
        env = os.environ.get(PREC_ENV)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise UsageError(f"{PREC_ENV} must be an integer (got {env!r})") from None
        else:
            value = DEFAULT_PREC
    if value < 32:
        raise UsageError("precision must be at least 32 bits")
    return value


def _ainvs(curve: WeierstrassCurve) -> str:
    return ",".join(format_element(a) for a in curve.ainvs)


# -- commands --------------------------------------------------------------------


def cmd_height(args, prec: int) -> tuple[bool, dict]:
    E = resolve_curve(args.curve)
    pts = resolve_points(E, args.point)
    rows = [{"point": P.format(), **canonical_height(E, P, prec).to_dict()} for P in pts]
    return True, {"command": "height", "curve": _ainvs(E), "precision": prec, "method": "doubling", "rows": rows}


def cmd_local_heights(args, prec: int) -> tuple[bool, dict]:
    E = resolve_curve(args.curve)
    pts = resolve_points(E, args.point)
    rows, ok = [], True
    for P in pts:
        if not P.is_rational():
            raise UsageError(f"local-heights takes rational points (got {P.format()})")
        dec = canonical_height_local_sum(E, P, prec)
        dbl = canonical_height(E, P, prec)
        agree = (dec.total - dbl).contains_zero()
        ok &= agree
        for r in dec.to_rows():
            rows.append({"point": P.format(), **r})
        rows.append({"point": P.format(), "place": "total", "weight": "1", **dec.total.to_dict()})
        rows.append({"point": P.format(), "place": "doubling", "weight": "1", **dbl.to_dict(), "agrees": agree})
        if args.m:
            ok &= _base_change_rows(E, P, args.m, args.prime, prec, rows)
    return ok, {"command": "local-heights", "curve": _ainvs(E), "precision": prec, "pass": ok, "rows": rows}


def _base_change_rows(E, P, m: int, primes, prec: int, rows: list) -> bool:
    """lambda_w at the places of Q(zeta_m) over each good p, and the weighted sum
    against lambda_p."""
    if not primes:
        raise UsageError("--m needs at least one --prime")
    bad = set(bad_primes(E))
    ok = True
    for p in primes:
        if p in bad:
            raise UsageError(f"p = {p} is a bad prime; base change rows need good reduction")
        try:
            places = place_structure(m, p)
        except RamifiedUnsupported as exc:
            raise UsageError(str(exc)) from None
        total = None
        for w in places:
            lam = lambda_nonarch_place(E, P, w, prec)
            rows.append({"point": P.format(), "place": w.label, "weight": str(w.weight), **lam.to_dict()})
            term = lam.scale(w.weight)
            total = term if total is None else total + term
        lam_p = lambda_nonarch(E, P, p, prec)
        same = (total - lam_p).contains_zero()
        ok &= same
        rows.append({"point": P.format(), "place": f"p={p},m={m},sum", "weight": "1", **total.to_dict(),
                     "agrees": same})
    return ok


def cmd_constants(args, prec: int) -> tuple[bool, dict]:
    E = resolve_curve(args.curve)
    out = {"command": "constants", "curve": _ainvs(E), "precision": prec,
           "j": format_element(E.j),
           "elkies": elkies_constant(E, prec).to_dict(), "multiplicative": []}
    for p in bad_primes(E):
        red = reduction_data(E, p)
        if red.is_multiplicative:
            out["multiplicative"].append({"type": red.type, **theorem2_constants(E, p, precision=prec).to_dict()})
    cm = _cm_field(E)
    out["cm_field"] = cm
    if cm is not None:
        try:
            out["certificate"] = bound_certificate(E, base=args.field, p=args.prime[0] if args.prime else None,
                                                   precision=prec).to_dict()
        except (NoAdmissiblePrime, InvalidPlace) as exc:
            out["certificate"] = {"error": str(exc)}
    return True, out


def cmd_bound(args, prec: int) -> tuple[bool, dict]:
    E = resolve_curve(args.curve)
    p = args.prime[0] if args.prime else None
    try:
        cert = bound_certificate(E, base=args.field, p=p, precision=prec)
    except (NoAdmissiblePrime, InvalidPlace) as exc:
        return False, {"command": "bound", "curve": _ainvs(E), "field": args.field, "pass": False, "error": str(exc)}
    checks = verify_admissible(E, args.field, cert.p, prec)
    ok = all(checks.values())
    return ok, {"command": "bound", "curve": _ainvs(E), "field": args.field, "precision": prec,
                "certificate": cert.to_dict(), "verified": checks, "pass": ok}


def cmd_verify(args, prec: int) -> tuple[bool, dict]:
    budget = BUDGETS[args.budget]
    names = args.suite or ["all"]
    results = run_suites(names, budget)
    ok = all(r["pass"] for r in results)
    rows = []
    for r in results:
        for i, rep in enumerate(r["reports"]):
            name = rep.get("lemma") or rep.get("check") or rep.get("mode") or r["suite"]
            rows.append({"suite": r["suite"], "index": i, "check": name, "pass": bool(rep["pass"])})
    return ok, {"command": "verify-lemmas", "budget": budget.to_dict(), "pass": ok, "suites": results, "rows": rows}


def cmd_survey(args, prec: int) -> tuple[bool, dict]:
    E = resolve_curve(args.curve)
    budget = BUDGETS[args.budget]
    B = budget.box if args.box is None else args.box
    if B > budget.box:
        raise UsageError(f"--box {B} exceeds the {budget.name} budget (B <= {budget.box}); use --budget full")
    p = args.prime[0] if args.prime else None
    try:
        cert = bound_certificate(E, base=args.field, p=p, precision=prec)
    except (NoAdmissiblePrime, InvalidPlace) as exc:
        return False, {"command": "survey", "curve": _ainvs(E), "pass": False, "error": str(exc), "rows": []}
    res = height_floor_survey(E, SurveyFamily(B=B), cert, prec)
    return res.passed, {"command": "survey", "curve": _ainvs(E), "field": args.field, "box": B,
                        "precision": prec, "summary": res.to_dict(), "rows": [r.to_record() for r in res.rows]}


HANDLERS = {
    "height": cmd_height,
    "local-heights": cmd_local_heights,
    "constants": cmd_constants,
    "bound": cmd_bound,
    "verify-lemmas": cmd_verify,
    "survey": cmd_survey,
}


def _canonical_argv(args, prec: int) -> list[str]:
    argv = [args.command]
    if args.curve:
        argv += ["--curve", args.curve]
    for t in args.point:
        argv += ["--point", t]
    for p in args.prime:
        argv += ["--prime", str(p)]
    if args.m is not None:
        argv += ["--m", str(args.m)]
    if args.box is not None:
        argv += ["--box", str(args.box)]
    argv += ["--field", args.field, "--prec", str(prec), "--budget", args.budget, "--format", args.format]
    for s in getattr(args, "suite", None) or []:
        argv += ["--suite", s]
    return argv


def _execute(argv: Sequence[str]) -> tuple[int, bytes, object, int]:
    args = build_parser().parse_args(list(argv))
    if args.command is None:
        raise UsageError(f"missing subcommand; choose one of {', '.join(COMMANDS)}")
    if args.command == "replay":
        return (*_replay(args.manifest_path), args, 0)
    prec = resolve_precision(args.prec)
    try:
        ok, payload = HANDLERS[args.command](args, prec)
    except UsageError:
        raise
    except HeightlabError as exc:
        ok, payload = False, {"command": args.command, "pass": False, "error": f"{type(exc).__name__}: {exc}"}
    cols = SURVEY_COLUMNS if args.command == "survey" else None
    return (0 if ok else 1), emit_report(payload, args.format, cols), args, prec


def _replay(path: str) -> tuple[int, bytes]:
    try:
        man = load_manifest(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest {path!r}: {exc}") from None
    argv = man.inputs.get("argv")
    if not argv or argv[0] == "replay":
        raise UsageError(f"manifest {path!r} has no replayable argv")
    code, data, _, _ = _execute(argv)
    if man.output_digest and digest(data) != man.output_digest:
        return 1, data
    return code, data


def run_command(argv: Sequence[str]) -> tuple[int, bytes]:
    """Parse argv, run the subcommand and return (exit code, report bytes).

    Usage errors return (2, message). --out and --manifest are honoured here.
    """
    try:
        code, data, args, prec = _execute(argv)
    except UsageError as exc:
        return 2, f"usage error: {exc}\n".encode()
    out = getattr(args, "out", None)
    if out:
        Path(out).write_bytes(data)
    man_path = getattr(args, "manifest", None)
    if man_path and args.command != "replay":
        inputs = {"argv": _canonical_argv(args, prec), "curve": args.curve, "points": list(args.point),
                  "primes": list(args.prime), "m": args.m, "field": args.field, "box": args.box,
                  "precision": prec, "budget": BUDGETS[args.budget].to_dict()}
        make_manifest(args.command, inputs, data, args.format).write(man_path)
    return code, data


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, data = run_command(argv)
    if code == 2:
        sys.stderr.write(data.decode())
        return code
    try:
        args = build_parser().parse_args(list(argv))
        to_stdout = not getattr(args, "out", None)
    except UsageError:
        to_stdout = True
    if to_stdout:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
