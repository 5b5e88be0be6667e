"""Command-line front end: ``pdtlab <command> ...``.

Exit status is 0 exactly when every check the command performs passes,
1 when a check fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__, ledger
from .circuits import NetlistError, circuit_to_strategy, read_circuit
from .core import (
    FunctionError,
    build_named,
    function_id,
    from_description,
    ones_in_binary,
    read_truth_table,
    write_truth_table,
)
from .pdt import (
    TreeError,
    check_strategy,
    dumps_tree,
    materialize,
    read_tree,
    verify_tree,
    write_tree,
)
from .solver import (
    NotApplicable,
    adversary_refute,
    bound_profile,
    check_refutation,
    exact_depth,
)
from .spectral import anf, write_spectrum, wht
from .strategies import named_strategy, strategy_target, thr_reduce
from .suite import DEFAULT_SEED, SUITES, run_suites


class UsageError(Exception):
    pass


def _load_function(args):
    if bool(args.fn) == bool(args.file):
        raise UsageError("give exactly one of --fn or --file")
    if args.fn:
        return from_description(args.fn)
    return read_truth_table(args.file)


def _emit(args, obj: dict):
    if getattr(args, "json", False):
        print(json.dumps(obj, sort_keys=True))
    else:
        for key, val in obj.items():
            if isinstance(val, dict):
                val = ", ".join(f"{k}={v}" for k, v in val.items())
            print(f"{key}: {val}")


def _record(args, entry: ledger.LedgerEntry):
    path = ledger.resolve_path(args.ledger)
    if path:
        ledger.append(path, entry)


def _entry(kind, fid, n, started, **kw):
    return ledger.LedgerEntry(kind, fid, n, started, ledger.now(), __version__, **kw)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_measures(args) -> int:
    started = ledger.now()
    f = _load_function(args)
    prof = bound_profile(f, with_certificate=args.certificate)
    report = {"function": function_id(f), "n": f.n, **prof.as_dict()}
    if args.anf:
        report["anf"] = str(anf(f))
    if args.spectrum_out:
        write_spectrum(wht(f), args.spectrum_out)
        report["spectrum_out"] = args.spectrum_out
    _emit(args, report)
    _record(args, _entry(
        "measures", function_id(f), f.n, started,
        spar=prof.spar, gran=prof.gran, deg2=prof.deg2, cert=prof.cert_bound, bounds=prof.as_dict(),
    ))
    return 0


def cmd_solve(args) -> int:
    started = ledger.now()
    f = _load_function(args)
    rep = exact_depth(f, max_seconds=args.budget_seconds, max_nodes=args.max_nodes, threads=args.threads)
    out = rep.to_json()
    ok = rep.is_exact
    if rep.witness is not None:
        out["witness_verified"] = verify_tree(rep.witness, f).ok
        ok = ok and out["witness_verified"]
        if args.witness_out:
            write_tree(rep.witness, args.witness_out)
    print(json.dumps(out, sort_keys=True))
    kw = {"exact_depth": rep.exact_depth} if rep.is_exact else {"interval": [rep.lower, rep.upper]}
    _record(args, _entry(
        "solve", rep.function_id, f.n, started,
        spar=rep.bounds.spar, gran=rep.bounds.gran, deg2=rep.bounds.deg2, bounds=rep.bounds.as_dict(),
        extra={"nodes_expanded": rep.nodes_expanded, "memo_hits": rep.memo_hits, "wall_ms": out["wall_ms"]},
        **kw,
    ))
    return 0 if ok else 1


def cmd_strategy(args) -> int:
    started = ledger.now()
    if args.name in ("maj", "thr2", "thr3") and args.n is None:
        raise UsageError(f"--n is required for {args.name}")
    if args.name == "rmaj" and args.k is None:
        raise UsageError("--k is required for rmaj")
    s = named_strategy(args.name, args.n, args.k)
    target = strategy_target(args.name, args.n, args.k)
    chk = check_strategy(s, target, args.verify)
    report = {
        "strategy": s.name,
        "n": target.n,
        "correct": chk.correct,
        "worst_case": chk.worst_case,
        "declared": chk.budget,
        "tight": chk.tight,
        "verify": chk.mode,
        "tree_nodes": chk.nodes,
        "dependent_queries": chk.dependent_queries,
    }
    if chk.witness is not None:
        report["counterexample"] = chk.witness
    if args.emit_tree:
        write_tree(materialize(s, target.n), args.emit_tree)
        report["tree_out"] = args.emit_tree
    _emit(args, report)
    _record(args, _entry("strategy", target.name, target.n, started, strategy=report))
    return 0 if chk.correct and chk.within_budget else 1


def cmd_refute(args) -> int:
    started = ledger.now()
    f = _load_function(args)
    t = read_tree(args.tree, f.n)
    ref = adversary_refute(f, t)
    if isinstance(ref, NotApplicable):
        _emit(args, {"refuted": False, "reason": ref.reason})
        return 1
    ok = check_refutation(f, t, ref)
    report = {
        "refuted": True,
        "rechecked": ok,
        "character": hex(ref.character),
        "path": " ".join(f"{m:x}={b}" for m, b in ref.path) or "(root)",
        "leaf_label": ref.label,
        "x_true": ref.x_true,
        "x_false": ref.x_false,
        "wrong_input": ref.wrong,
    }
    _emit(args, report)
    _record(args, _entry("refute", function_id(f), f.n, started, extra=report))
    return 0 if ok else 1


def cmd_reduce_thr(args) -> int:
    started = ledger.now()
    t = read_tree(args.tree, args.n + 2)
    s = thr_reduce(t, args.n, args.k)
    target = build_named("thr", args.n, args.k)
    chk = check_strategy(s, target, "auto")
    report = {
        "input_depth": t.depth(),
        "target": target.name,
        "correct": chk.correct,
        "worst_case": chk.worst_case,
        "declared": chk.budget,
        "verify": chk.mode,
    }
    if args.emit_tree:
        write_tree(materialize(s, args.n), args.emit_tree)
        report["tree_out"] = args.emit_tree
    _emit(args, report)
    _record(args, _entry("reduce-thr", target.name, args.n, started, strategy=report))
    return 0 if chk.correct and chk.worst_case <= t.depth() - 1 else 1


def cmd_circuit(args) -> int:
    started = ledger.now()
    c = read_circuit(args.file)
    f = c.to_function()
    report = {"n": c.n, "and_count": c.and_count(), "function": function_id(f)}
    ok = True
    if args.to_pdt:
        s = circuit_to_strategy(c, args.pick)
        chk = check_strategy(s, f, "exhaustive")
        report.update(correct=chk.correct, worst_case=chk.worst_case, declared=chk.budget)
        ok = chk.correct and chk.within_budget
        if args.emit_tree:
            write_tree(materialize(s, c.n), args.emit_tree)
            report["tree_out"] = args.emit_tree
        elif not args.json:
            report["tree"] = dumps_tree(materialize(s, c.n)).strip()
    _emit(args, report)
    _record(args, _entry("circuit", function_id(f), c.n, started, strategy=report))
    return 0 if ok else 1


def cmd_export(args) -> int:
    f = _load_function(args)
    write_truth_table(f, args.out)
    print(f"wrote {args.out} (n={f.n})")
    return 0


def cmd_suite(args) -> int:
    results = run_suites(args.seed, args.cases, args.max_n, args.exhaustive_functions, args.only)
    all_ok = True
    for r in results:
        d = r.as_dict()
        all_ok &= r.ok
        if args.json:
            print(json.dumps(d, sort_keys=True))
        else:
            status = "PASS" if r.ok else "FAIL"
            print(f"{status} {r.name:<11} cases={r.cases:<5} digest={r.digest} {r.seconds:.2f}s")
            for msg in r.failures[:10]:
                print(f"    {msg}")
    print(f"seed={args.seed} {'all suites pass' if all_ok else 'FAILURES'}")
    return 0 if all_ok else 1


def cmd_corollary(args) -> int:
    """Print the AND-count lower bound implied by the granularity bound."""
    from .spectral import granularity

    ok = True
    for n in range(1, args.max_n + 1):
        g = granularity(wht(build_named("maj", n)))
        claim = n - ones_in_binary(n)
        ok &= g == claim
        print(f"n={n:2d} gran={g:2d}  D >= {g + 1:2d}  =>  and_count(MAJ_{n}) >= {g}  (n - B(n) = {claim})")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_source(p):
    p.add_argument("--fn", help="named function, e.g. maj:7, thr:10,3, rmaj:2, ip:6, random:8,1")
    p.add_argument("--file", help="PDTTT truth-table file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdtlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pdtlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ledger", help=f"JSON-lines ledger to append to (default: ${ledger.LEDGER_ENV})")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", parents=[common], help="spectral measures and lower bounds")
    _add_source(p)
    p.add_argument("--anf", action="store_true", help="print the algebraic normal form")
    p.add_argument("--spectrum-out", help="write nonzero Walsh coefficients to this file")
    p.add_argument("--certificate", action="store_true", help="also compute the parity certificate bound")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("solve", parents=[common], help="exact parity decision tree depth")
    _add_source(p)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--witness-out", help="write the optimal tree (s-expression)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("strategy", parents=[common], help="verify a named query strategy")
    p.add_argument("--name", required=True, choices=["maj", "rmaj", "thr2", "thr3"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--verify", choices=["auto", "exhaustive", "leafwise"], default="auto")
    p.add_argument("--emit-tree", help="write the materialized tree")
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("refute", parents=[common], help="granularity adversary against a shallow tree")
    _add_source(p)
    p.add_argument("--tree", required=True)
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("reduce-thr", parents=[common], help="turn a THR(n+2,k+1) tree into a THR(n,k) strategy")
    p.add_argument("--tree", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--emit-tree")
    p.set_defaults(func=cmd_reduce_thr)

    p = sub.add_parser("circuit", parents=[common], help="XOR-AND netlist: count ANDs, simulate by queries")
    p.add_argument("--file", required=True)
    p.add_argument("--to-pdt", action="store_true")
    p.add_argument("--pick", choices=["smaller", "left", "right"], default="smaller")
    p.add_argument("--emit-tree")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("export", help="write a named function as a PDTTT file")
    _add_source(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("suite", help="seeded property suites")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--cases", type=int, default=40)
    p.add_argument("--max-n", type=int, default=10)
    p.add_argument("--exhaustive-functions", action="store_true",
                   help="cross-check every 3-variable function against the naive solver")
    p.add_argument("--only", nargs="*", choices=sorted(SUITES))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("corollary", help="AND-count lower bounds for majority from granularity")
    p.add_argument("--max-n", type=int, default=20)
    p.set_defaults(func=cmd_corollary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FunctionError, TreeError, NetlistError, ledger.LedgerError, ValueError, OSError) as exc:
        print(f"pdtlab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
