"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import bounds
from .bp import (
    BpMetrics,
    BranchingProgram,
    CapExceeded,
    DEFAULT_EXHAUSTIVE_CAP,
    check_correct,
    check_thrifty,
    export_dot,
    growth_exponent,
)
from .compilers import (
    compile_black_det,
    compile_boolean_logsave,
    compile_fractional_nondet,
)
from .dag import PebbleDag, build_G, build_Gprime
from .pebbling import PebblingError, Variant, parse_sequence, validate_sequence
from .search import DEFAULT_STATE_CAP, SearchError, min_pebbles
from .strategies import (
    black_formula,
    bw_formula,
    fractional_upper,
    strategy_black,
    strategy_bw,
    strategy_fractional,
    strategy_whiteslide_h4,
)
from .tree import ProblemKind, TreeShape, evaluate, load_instance, node_values


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _shape(args) -> TreeShape:
    if args.d < 2 or args.h < 2:
        raise UsageError("--d and --h must be at least 2")
    return TreeShape(args.d, args.h)


def _k(args) -> int:
    if args.k < 2:
        raise UsageError("--k must be at least 2")
    return args.k


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None


# --- eval --------------------------------------------------------------------------


def cmd_eval(args) -> int:
    if not Path(args.instance).exists():
        raise UsageError(f"file not found: {args.instance}")
    try:
        inst = load_instance(args.instance)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed instance {args.instance}: {exc}") from None
    kind = ProblemKind(args.kind)
    val = evaluate(inst, kind)
    _emit(args, {"value": val, "node_values": list(node_values(inst))}, str(val))
    return 0


# --- pebbling ----------------------------------------------------------------------


def _strategy(variant: Variant, d: int, h: int):
    if variant is Variant.BLACK:
        return strategy_black(d, h), black_formula(d, h)
    if variant is Variant.BLACK_WHITE:
        return strategy_bw(d, h), bw_formula(d, h)
    if variant is Variant.FRACTIONAL:
        return strategy_fractional(d, h), fractional_upper(d, h)
    if (d, h) != (2, 4):
        raise UsageError("the white-sliding strategy is only available for d=2, h=4")
    return strategy_whiteslide_h4(), Fraction(8, 3)


def _search(args, target) -> int:
    variant = Variant(args.variant)
    if variant.whole and args.c != 1:
        raise UsageError(f"--c must be 1 for the {variant.value} game")
    try:
        res = min_pebbles(target, variant, args.c, args.budget_cap, args.state_cap, method=args.method)
    except SearchError as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return 1
    text = f"cost {res.cost}\nstates explored {res.states_explored}\n" + res.witness.to_text().rstrip()
    _emit(args, res.to_json(), text)
    return 0


def cmd_pebble_find(args) -> int:
    return _search(args, _shape(args))


def cmd_search(args) -> int:
    if args.dag:
        try:
            target = PebbleDag.from_text(_read(args.dag))
        except ValueError as exc:
            raise UsageError(f"malformed DAG file: {exc}") from None
    elif args.graph == "tree":
        target = _shape(args)
    else:
        _shape(args)
        build = build_G if args.graph == "G" else build_Gprime
        target = build(args.d, args.h, args.split)
    if args.export_dag:
        Path(args.export_dag).write_text(target.to_text() if isinstance(target, PebbleDag)
                                         else PebbleDag.from_tree(target).to_text())
    return _search(args, target)


def cmd_pebble_verify(args) -> int:
    variant = Variant(args.variant)
    target = None
    if args.d is not None and args.h is not None:
        target = _shape(args)
    try:
        seq = parse_sequence(_read(args.sequence), target)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        cost = validate_sequence(seq, variant)
    except PebblingError as exc:
        _emit(args, {"valid": False, "error": str(exc)}, f"INVALID: {exc}")
        return 1
    _emit(args, {"valid": True, "cost": str(cost), "moves": len(seq.moves)},
          f"valid, cost {cost}, {len(seq.moves)} moves")
    return 0


def cmd_pebble_show(args) -> int:
    variant = Variant(args.variant)
    seq, claimed = _strategy(variant, *(_shape(args).d, args.h))
    cost = validate_sequence(seq, variant)
    if args.out:
        Path(args.out).write_text(seq.to_text())
    payload = {"cost": str(cost), "claimed": str(claimed), "moves": len(seq.moves)}
    _emit(args, payload, f"# cost {cost} (claimed {claimed})\n" + seq.to_text().rstrip())
    return 0 if cost == claimed else 1


# --- compilation ---------------------------------------------------------------------


def _compile(args):
    shape = _shape(args)
    k = _k(args)
    if args.compiler == "black":
        kind = ProblemKind(args.kind)
        bp, rep = compile_black_det(strategy_black(shape.d, shape.h), k, kind, args.layout)
        return bp, rep, kind
    if args.compiler == "fractional":
        bp, rep = compile_fractional_nondet(strategy_fractional(shape.d, shape.h), k)
        return bp, rep, ProblemKind.BOOLEAN
    if args.compiler == "logsave":
        if shape.h != 3:
            raise UsageError("the logsave compiler needs --h 3")
        try:
            bp, rep = compile_boolean_logsave(shape.d, shape.h, k, args.m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return bp, rep, ProblemKind.BOOLEAN
    raise UsageError(f"unknown compiler {args.compiler}")


def _load_or_compile(args):
    if getattr(args, "program", None):
        bp = BranchingProgram.from_json(json.loads(_read(args.program)))
        kind = ProblemKind(args.kind) if bp.deterministic else ProblemKind.BOOLEAN
        if bp.deterministic and len(bp.output_range) == 2 and True in bp.output_range:
            kind = ProblemKind.BOOLEAN
        return bp, None, kind
    return _compile(args)


def cmd_compile(args) -> int:
    bp, rep, _ = _compile(args)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{args.compiler}_d{args.d}_h{args.h}_k{args.k}"
        (out / f"{stem}.bp.json").write_text(bp.dumps())
        (out / f"{stem}.report.json").write_text(json.dumps(rep.to_json(), sort_keys=True, indent=1) + "\n")
    text = f"{rep.compiler}: {rep.states} states"
    if rep.source_cost is not None:
        text += f" (pebbling cost {rep.source_cost})"
    _emit(args, rep.to_json(), text)
    return 0


def _check(args, fn) -> int:
    bp, _, kind = _load_or_compile(args)
    shape = _shape(args)
    try:
        if fn is check_correct:
            rep = check_correct(bp, shape, kind, args.mode, args.samples, args.seed, args.cap)
        else:
            rep = check_thrifty(bp, shape, args.mode, args.samples, args.seed, args.cap)
    except CapExceeded as exc:
        raise UsageError(f"{exc}; raise --cap or use --mode sampled") from None
    text = rep.summary()
    if not rep.ok:
        text += f"\ncounterexample: {list(rep.counterexample)}\n{rep.detail}"
    _emit(args, rep.to_json() | {"summary": rep.summary()}, text)
    return 0 if rep.ok else 1


def cmd_verify(args) -> int:
    return _check(args, check_correct)


def cmd_thrifty(args) -> int:
    return _check(args, check_thrifty)


def cmd_export_dot(args) -> int:
    bp, _, _ = _load_or_compile(args)
    dot = export_dot(bp)
    if args.out:
        Path(args.out).write_text(dot)
    else:
        sys.stdout.write(dot)
    return 0


# --- report ----------------------------------------------------------------------------


def _parse_range(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _pebble_cell(variant: str, d: int, h: int, c: int, state_cap: int) -> dict:
    v = Variant(variant)
    formula = {Variant.BLACK: black_formula, Variant.BLACK_WHITE: bw_formula,
               Variant.FRACTIONAL: fractional_upper}[v](d, h)
    row = {"variant": variant, "d": d, "h": h, "c": c, "formula": str(formula)}
    try:
        res = min_pebbles(TreeShape(d, h), v, c, state_cap=state_cap)
        row |= {"search": str(res.cost), "states": res.states_explored}
    except SearchError as exc:
        row |= {"search": f"cap exceeded ({type(exc).__name__})", "states": ""}
    return row


def _exponent_cell(d: int, h: int, k: int) -> dict:
    row = {"k": k}
    for name, fn in (("det_full", lambda: compile_black_det(strategy_black(d, h), k, layout="full")),
                     ("det_reachable", lambda: compile_black_det(strategy_black(d, h), k, layout="reachable")),
                     ("nondet", lambda: compile_fractional_nondet(strategy_fractional(d, h), k))):
        try:
            row[name] = fn()[0].size
        except CapExceeded:
            row[name] = None
    return row


def _run_cells(jobs: int, fn, cells: list[tuple]) -> list:
    # results come back in submission order, so output never depends on timing
    if jobs <= 1:
        return [fn(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*cells)))


def _md_table(header: list[str], rows: list[list]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join("" if x is None else str(x) for x in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    out = [",".join(header)]
    out += [",".join("" if x is None else str(x) for x in r) for r in rows]
    return "\n".join(out) + "\n"


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    invocation = "treeeval " + " ".join(shlex.quote(a) for a in args.argv)
    stamp = f"generated by: {invocation}\n"

    cells = [(v, args.d, h, 1, args.state_cap) for v in ("black", "bw") for h in _parse_range(args.hs)]
    cells += [("fractional", args.d, h, args.frac_c, args.state_cap) for h in _parse_range(args.frac_hs)]
    prow = _run_cells(args.jobs, _pebble_cell, cells)
    header = ["variant", "d", "h", "c", "formula", "search", "states"]
    rows = [[r[x] for x in header] for r in prow]
    (out / "pebbling.csv").write_text(f"# {stamp}" + _csv(header, rows))
    (out / "pebbling.md").write_text(f"Pebbling numbers: search against closed form\n\n{stamp}\n"
                                     + _md_table(header, rows))

    ks = _parse_range(args.ks)
    erow = _run_cells(args.jobs, _exponent_cell, [(args.d, args.exp_h, k) for k in ks])
    cols = ["det_full", "det_reachable", "nondet"]
    fits = []
    for col in cols:
        series = [(r["k"], r[col]) for r in erow if r[col] is not None]
        try:
            fits.append(f"{growth_exponent(series):.3f}")
        except ValueError:
            fits.append("")
    header = ["k"] + cols
    rows = [[r["k"]] + [r[c] for c in cols] for r in erow] + [["exponent"] + fits]
    (out / "exponents.csv").write_text(f"# {stamp}" + _csv(header, rows))
    (out / "exponents.md").write_text(
        f"State counts at d={args.d}, h={args.exp_h} with fitted exponents of k\n\n{stamp}\n"
        + _md_table(header, rows))

    table = bounds.neciporuk_table(args.d, args.nec_h, args.nec_k)
    (out / "neciporuk.csv").write_text(f"# {stamp}" + table.to_csv())
    (out / "neciporuk.md").write_text(stamp + "\n" + table.to_markdown())

    summary = {"files": sorted(p.name for p in out.iterdir() if p.suffix in (".csv", ".md")),
               "exponents": dict(zip(cols, fits))}
    _emit(args, summary, f"wrote {len(summary['files'])} files to {out}")
    return 0


# --- parser ----------------------------------------------------------------------------


def _tree_flags(p, k=False, required=True):
    p.add_argument("--d", type=int, required=required, default=None if required else 2)
    p.add_argument("--h", type=int, required=required, default=None if required else 3)
    if k:
        p.add_argument("--k", type=int, required=required, default=None if required else 2)


def _search_flags(p):
    p.add_argument("--variant", choices=[v.value for v in Variant], default="black")
    p.add_argument("--c", type=int, default=1, help="granularity: weights are multiples of 1/c")
    p.add_argument("--budget-cap", type=Fraction, default=None, help="largest cost to try (pebbles)")
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    p.add_argument("--method", choices=["bottleneck", "binary"], default="bottleneck")


def _compile_flags(p, program=False):
    _tree_flags(p, k=True)
    p.add_argument("--compiler", choices=["black", "fractional", "logsave"], default="black")
    p.add_argument("--kind", choices=[k.value for k in ProblemKind], default="function",
                   help="problem solved by the black compiler")
    p.add_argument("--layout", choices=["full", "reachable"], default="full")
    p.add_argument("--m", type=int, default=None, help="block size for the logsave compiler")
    if program:
        p.add_argument("--program", help="check a BP JSON file instead of compiling one")


def _check_flags(p):
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_EXHAUSTIVE_CAP, help="largest k^m for exhaustive mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeeval", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a TEP instance from JSON")
    p.add_argument("--instance", required=True)
    p.add_argument("--kind", choices=[k.value for k in ProblemKind], default="function")
    p.set_defaults(func=cmd_eval)

    peb = sub.add_parser("pebble", help="pebbling games on complete trees")
    psub = peb.add_subparsers(dest="pebble_command", required=True)
    p = psub.add_parser("find", help="exact minimum-cost pebbling by search")
    _tree_flags(p)
    _search_flags(p)
    p.set_defaults(func=cmd_pebble_find)
    p = psub.add_parser("verify", help="validate a pebbling sequence file")
    p.add_argument("--sequence", required=True)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="black")
    _tree_flags(p, required=False)
    p.set_defaults(func=cmd_pebble_verify, d=None, h=None)
    p = psub.add_parser("show", help="print the generated strategy for a game")
    _tree_flags(p)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="black")
    p.add_argument("--out", help="also write the sequence to this file")
    p.set_defaults(func=cmd_pebble_show)

    p = sub.add_parser("search", help="exact search on a tree, a split DAG or a DAG file")
    p.add_argument("--dag", help="edge-list DAG file")
    p.add_argument("--graph", choices=["tree", "G", "Gprime"], default="tree")
    p.add_argument("--split", type=int, default=2, help="copies per node for G and Gprime")
    p.add_argument("--export-dag", help="write the searched DAG in edge-list form")
    _tree_flags(p, required=False)
    _search_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("compile", help="compile a pebbling strategy into a branching program")
    _compile_flags(p)
    p.add_argument("--out", help="directory for BP and report JSON")
    p.set_defaults(func=cmd_compile)

    for name, fn, text in (("verify", cmd_verify, "check a program's outputs on all or sampled inputs"),
                           ("thrifty", cmd_thrifty, "check that function queries use the children's values")):
        p = sub.add_parser(name, help=text)
        _compile_flags(p, program=True)
        _check_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("export-dot", help="write a compiled program as Graphviz DOT")
    _compile_flags(p, program=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("report", help="write the reproduction tables")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--hs", default="2-5", help="heights for the black and BW rows")
    p.add_argument("--frac-hs", default="3-4", help="heights for the fractional rows")
    p.add_argument("--frac-c", type=int, default=2)
    p.add_argument("--exp-h", type=int, default=3, help="height for the state-count table")
    p.add_argument("--ks", default="2-8")
    p.add_argument("--nec-h", type=int, default=3)
    p.add_argument("--nec-k", type=int, default=4)
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treeeval: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
