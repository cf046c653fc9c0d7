"""Command-line front end.

Exit codes: 0 valid/ok, 1 invalid (or golden mismatch), 2 parse error,
3 semantic error, 4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import difflib
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .consequence import DEFAULT_CAP, CapExceeded, Relation, Sequent, classical_agreement, refutes, valid
from .proofs import ProofError, check_relations, first_failure, load_proof, proof_report
from .scenarios import SCENARIOS, UnknownScenario, golden_text, run_scenario
from .semantics import (
    ConnectiveFamily,
    Model,
    SemanticError,
    check_transparency,
    evaluate,
    model_from_json,
)
from .syntax import (
    EMPTY_CONTEXT,
    FormulaError,
    UnboundNameError,
    is_closed,
    parse,
    parse_context,
    parse_declaration,
    render,
    subformulas,
)
from .temporal import FrameError, evaluate_at, frame_from_json

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_SEMANTIC, EXIT_CAP = 0, 1, 2, 3, 4


class InputError(Exception):
    """Unreadable or malformed input file."""


@dataclass
class Config:
    family: ConnectiveFamily | None
    relations: list
    transparent: bool | None
    cap: int
    json: bool


def _config(args) -> Config:
    cap = args.cap
    if cap is None:
        env = os.environ.get("BRIDGELAB_CAP")
        try:
            cap = int(env) if env else DEFAULT_CAP
        except ValueError:
            raise InputError(f"BRIDGELAB_CAP must be an integer, got {env!r}") from None
    rel = getattr(args, "relation", None)
    relations = [Relation(r.strip().lower()) for r in rel.split(",")] if rel else []
    fam = ConnectiveFamily(args.family) if getattr(args, "family", None) else None
    return Config(fam, relations, getattr(args, "transparent", None), cap, args.json)


def _resolve(path: str) -> Path:
    """A path as given, or a bare filename shipped with the package."""
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("bridgelab").joinpath("data", path)
    if os.sep not in path and shipped.is_file():
        return Path(str(shipped))
    raise InputError(f"no such file: {path}")


def _read_json(path: str) -> dict:
    try:
        return json.loads(_resolve(path).read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: {e}") from None


def _emit(cfg: Config, payload: dict, text: str):
    if cfg.json:
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(v) -> str:
    return {0: "0", 0.5: "0.5", 1: "1"}[v]


def _model_text(model_json: dict) -> str:
    return "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in model_json["atoms"].items()) + "}"


# --------------------------------------------------------------------------
# eval


def cmd_eval(args, cfg: Config) -> int:
    ctx = EMPTY_CONTEXT
    if args.ctx:
        ctx = parse_context(_resolve(args.ctx).read_text())
    fam = cfg.family or ConnectiveFamily.STRONG_KLEENE
    if args.frame:
        frame = frame_from_json(_read_json(args.frame), ctx)
        f = parse(args.formula, ctx)
        transparent = True if cfg.transparent is None else cfg.transparent
        value = evaluate_at(f, frame, args.moment, ctx, transparent, fam)
        trace = _trace(f, lambda g: evaluate_at(g, frame, args.moment, ctx, transparent, fam), ctx) if args.trace else None
        violations = []
    else:
        if args.model:
            m = model_from_json(_read_json(args.model), ctx)
        else:
            m = Model(ctx=ctx)
        if cfg.transparent is not None:
            m = Model(m.domain, m.atoms, m.ctx, cfg.transparent)
        f = parse(args.formula, m.ctx)
        value = evaluate(f, m, fam)
        violations = check_transparency(m, fam) if m.transparent else []
        trace = _trace(f, lambda g: evaluate(g, m, fam), m.ctx) if args.trace else None
        ctx = m.ctx
    payload = {"formula": render(f, ctx), "family": fam.value, "value": value.to_json()}
    if violations:
        payload["transparencyViolations"] = [v.to_json() for v in violations]
    if trace is not None:
        payload["trace"] = trace
    lines = [_fmt(value.to_json())]
    if trace is not None:
        width = max(len(row["formula"]) for row in trace)
        lines += [f"  {row['formula']:<{width}}  {_fmt(row['value'])}" for row in trace]
    for v in violations:
        print(f"warning: transparency fails at {v.name}: True({v.name}) = {v.lhs}, referent = {v.rhs}", file=sys.stderr)
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK


def _trace(f, value_of, ctx) -> list:
    rows, seen = [], set()
    for g in reversed(list(subformulas(f))):
        if g in seen or not is_closed(g):
            continue
        seen.add(g)
        rows.append({"formula": render(g, ctx), "value": value_of(g).to_json()})
    return rows


# --------------------------------------------------------------------------
# check


def load_sequent(data: dict, transparent_override=None) -> tuple[Sequent, Relation | None, ConnectiveFamily | None]:
    ctx = EMPTY_CONTEXT
    for name, text in (data.get("names") or {}).items():
        ctx = parse_declaration(f"name {name} := {text}", ctx)
    for name, text in (data.get("definitions") or {}).items():
        ctx = parse_declaration(f"define {name} := {text}", ctx)
    premises = tuple(parse(p, ctx) for p in data.get("premises", []))
    if "conclusion" not in data:
        raise InputError("sequent file needs a 'conclusion'")
    conclusion = parse(data["conclusion"], ctx)
    transparent = bool(data.get("transparent", False)) if transparent_override is None else transparent_override
    domain = tuple(data["domain"]) if data.get("domain") else None
    rel = Relation(data["relation"].lower()) if data.get("relation") else None
    fam = ConnectiveFamily(data["family"]) if data.get("family") else None
    return Sequent(premises, conclusion, ctx, transparent, domain), rel, fam


def cmd_check(args, cfg: Config) -> int:
    seq, file_rel, file_fam = load_sequent(_read_json(args.sequent), cfg.transparent)
    relation = (cfg.relations or [file_rel or Relation.CL])[0]
    fam = cfg.family or file_fam or ConnectiveFamily.STRONG_KLEENE
    verdict = valid(seq, relation, fam, cfg.cap)
    if verdict.countermodel is not None and not refutes(verdict.countermodel, seq, relation, fam):
        raise SemanticError("internal error: countermodel does not refute the sequent")
    payload = {
        "sequent": seq.render(),
        "relation": relation.name,
        "family": fam.value,
        "transparent": seq.transparent,
        **verdict.to_json(),
    }
    if verdict.valid:
        text = f"valid under {relation.name} ({verdict.models_checked} models checked)"
    else:
        text = f"invalid under {relation.name}; countermodel {_model_text(verdict.countermodel.to_json())}"
    _emit(cfg, payload, text)
    return EXIT_OK if verdict.valid else EXIT_INVALID


# --------------------------------------------------------------------------
# proof


def cmd_proof(args, cfg: Config) -> int:
    if args.proof.startswith("builtin:"):
        p = load_proof(args.proof)
    else:
        p = load_proof(str(_resolve(args.proof)))
    relations = cfg.relations or [Relation.CL]
    families = {r: cfg.family for r in relations} if cfg.family else None
    verdicts = check_relations(p, relations, families, cfg.transparent, cfg.cap)
    report = proof_report(p, verdicts, relations)
    primary = relations[0]
    lines = [f"proof {p.name}: {report['conclusion']}"]
    if report["openAssumptions"]:
        lines.append("open assumptions: " + ", ".join(report["openAssumptions"]))
    header = ["id", "rule", *[f"{r.name}/{report['summary'][r.name]['family']}" for r in relations], "conclusion"]
    rows = []
    for v in verdicts:
        marks = []
        for r in relations:
            chk = v.per_relation[r]
            mark = "ok" if chk.valid else "FAIL"
            if chk.sequent.valid != chk.valid:
                mark += " (seq " + ("ok" if chk.sequent.valid else "FAIL") + ")"
            marks.append(mark)
        rows.append([v.step_id, v.rule.value, *marks, render(v.conclusion, p.ctx)])
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header) - 1)]
    for r in [header, *rows]:
        lines.append("  " + "  ".join(f"{c:<{w}}" for c, w in zip(r, widths)) + "  " + r[-1])
    for r in relations:
        s = report["summary"][r.name]
        if s["allStepsValid"]:
            lines.append(f"{r.name}: every step valid")
        else:
            bad = first_failure(verdicts, r)
            cm = bad.per_relation[r].rule.countermodel.to_json()
            lines.append(f"{r.name}: first failure at {bad.step_id} ({bad.rule.value}); countermodel {_model_text(cm)}")
        lines.append(f"{r.name}: root sequent {'valid' if s['rootSequentValid'] else 'invalid'}")
    _emit(cfg, report, "\n".join(lines))
    return EXIT_OK if report["summary"][primary.name]["allStepsValid"] else EXIT_INVALID


# --------------------------------------------------------------------------
# scenario


def cmd_scenario(args, cfg: Config) -> int:
    if args.action == "list":
        _emit(cfg, {"scenarios": list(SCENARIOS)}, "\n".join(SCENARIOS))
        return EXIT_OK
    if not args.name:
        raise InputError("scenario run needs a name: " + ", ".join(SCENARIOS))
    report = run_scenario(args.name)
    out = report.dumps()
    if args.check_golden:
        expected = golden_text(args.name)
        if out != expected:
            diff = difflib.unified_diff(expected.splitlines(True), out.splitlines(True), "golden", "current")
            sys.stdout.writelines(diff)
            return EXIT_INVALID
    if cfg.json:
        sys.stdout.write(out)
    else:
        text = report.text()
        if args.check_golden:
            text += "  matches golden file\n"
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# agreement


def cmd_agreement(args, cfg: Config) -> int:
    rep = classical_agreement(args.atoms, args.depth, args.premises, cfg.cap)
    payload = rep.to_json()
    lines = [
        f"{rep.sequents} sequents over {rep.distinct_functions} distinct formulas "
        f"(pool of {rep.pool_size}, {rep.n_atoms} atoms, depth {rep.depth}, up to {rep.max_premises} premises)",
        "valid: " + ", ".join(f"{k} {v}" for k, v in rep.valid_counts.items()),
        *(f"{k}: {v}" for k, v in rep.violations.items()),
        "empirical check: " + ("no disagreements" if rep.ok else "disagreements found"),
    ]
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_INVALID


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--cap", type=int, default=None, help=f"max free atoms to enumerate (default {DEFAULT_CAP}, or $BRIDGELAB_CAP)")

    def semantic_flags(p, relation=True):
        p.add_argument("--family", choices=[f.value for f in ConnectiveFamily])
        p.add_argument("--transparent", action=argparse.BooleanOptionalAction, default=None,
                       help="require True(n) to match its referent")
        if relation:
            p.add_argument("--relation", help="cl, ss, tt, st or ts; proof accepts a comma list")

    ap = argparse.ArgumentParser(prog="bridgelab", description="Three-valued logic workbench for the Bridge paradox.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a formula in a model or frame")
    p.add_argument("formula")
    p.add_argument("-m", "--model", help="model JSON file")
    p.add_argument("--ctx", help="context file with name/define lines")
    p.add_argument("--frame", help="branching frame JSON file")
    p.add_argument("--moment", default="t0")
    p.add_argument("--trace", action="store_true", help="print the value of every closed subformula")
    semantic_flags(p, relation=False)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="decide a sequent file")
    p.add_argument("sequent")
    semantic_flags(p)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("proof", parents=[common], help="check a proof script step by step")
    p.add_argument("proof", help="script path or builtin:<name>")
    semantic_flags(p)
    p.set_defaults(run=cmd_proof)

    p = sub.add_parser("scenario", parents=[common], help="run a canned analysis")
    p.add_argument("action", choices=["run", "list"])
    p.add_argument("name", nargs="?", help=", ".join(SCENARIOS))
    p.add_argument("--check-golden", action="store_true", help="compare the JSON report with the shipped golden file")
    p.set_defaults(run=cmd_scenario)

    p = sub.add_parser("agreement", parents=[common], help="compare ST and classical validity on a formula pool")
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--premises", type=int, default=2)
    p.set_defaults(run=cmd_agreement)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return args.run(args, cfg)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (UnboundNameError, SemanticError) as e:
        print(f"semantic error: {e}", file=sys.stderr)
        return EXIT_SEMANTIC
    except (FormulaError, ProofError, FrameError, InputError, UnknownScenario, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
