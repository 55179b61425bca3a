"""Command-line front end.

JSON output is the stable surface (keys sorted, one document per command,
or one line per run for ``sieve``); text output is for people.

Exit codes: 0 success, 1 premises fail, 2 invalid input, 3 a search budget
or construction limit was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from typing import Any, Callable, TextIO

from .core import DigitMap, DigitMapError, classify, compute_atlas, parse_table
from .hypotheses import PremiseError, check_premises, construct_g, pan_condition
from .sieve import Sieve, default_threads, write_csv, write_jsonl
from .symbolic import SymbolicError, value_to_json
from .verify import verify_witness
from .witnesses import (
    BudgetExceeded,
    DepthExceeded,
    Strategy,
    StrategyInfeasible,
    WitnessError,
    concurrent_pair,
    congruent_u_preimage,
    consecutive_run,
    shift_all_witness,
    shift_witness,
)

EXIT_OK, EXIT_PREMISES, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def _map_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("digit map (exactly one source)")
    g.add_argument("--map", metavar="FILE", help="JSON file {base, table} or {base, exponent}")
    g.add_argument("--table", help="comma-separated digit values, with --base")
    g.add_argument("--base", type=int)
    g.add_argument("--e", type=int, help="power map exponent, with --b")
    g.add_argument("--b", type=int, help="power map base")
    return p


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $DIGITMAP_THREADS or 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    maps, common = _map_options(), _common_options()
    parser = _Parser(prog="digitmap", description="Iterated digit maps and runs of consecutive u-integers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("analyze", parents=[maps, common], help="cycles, threshold and basin sizes")
    sub.add_parser("check", parents=[maps, common], help="premise report")

    p = sub.add_parser("classify", parents=[maps, common], help="eventual cycle and phase of N")
    p.add_argument("n", type=int)
    p.add_argument("--u", type=int)

    p = sub.add_parser("sieve", parents=[maps, common], help="maximal runs of u-integers")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--min-len", type=int, default=1)
    p.add_argument("--csv", metavar="FILE", help="also write the runs as CSV")

    p = sub.add_parser("witness", parents=[maps, common], help="build and verify a witness")
    p.add_argument("--kind", choices=("shift", "preimage", "pair", "shiftall", "run"), required=True)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.SEARCH.value)
    p.add_argument("--u", type=int)
    p.add_argument("--x", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--h", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--depth-limit", type=int, default=2)

    p = sub.add_parser("happy", parents=[common], help="prime-divisor condition and digit certificate for m -> m**e")
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    return parser


def load_map(args: argparse.Namespace) -> DigitMap:
    sources = [args.map is not None, args.table is not None, args.e is not None or args.b is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --map, --table/--base or --e/--b")
    if args.map is not None:
        return DigitMap.load(args.map)
    if args.table is not None:
        if args.base is None:
            raise UsageError("--table needs --base")
        return DigitMap(args.base, parse_table(args.table))
    if args.e is None or args.b is None:
        raise UsageError("--e and --b go together")
    return DigitMap.power(args.e, args.b)


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--kind {args.kind} needs {' '.join(missing)}")


# -- commands ------------------------------------------------------------------


def cmd_analyze(args, out: TextIO) -> int:
    atlas = compute_atlas(load_map(args))
    summary = atlas.summary()
    if args.format == "json":
        _dump(summary, out)
    else:
        out.write(f"base {atlas.map.base}, table {list(atlas.map.table)}\n")
        out.write(f"threshold {atlas.threshold}\n")
        for cyc, size in zip(atlas.cycles, summary["cycle_sizes"]):
            out.write(f"cycle {' -> '.join(map(str, cyc))} (length {len(cyc)}, {size} of 1..T)\n")
    return EXIT_OK


def cmd_check(args, out: TextIO) -> int:
    report = check_premises(load_map(args))
    if args.format == "json":
        _dump(report.to_json(), out)
    else:
        out.write(("premises hold" if report.ok else "premises fail") + "\n")
        out.write(f"m* candidates: {list(report.m_star_candidates)}\n")
        for reason in report.reasons:
            out.write(f"  {reason}\n")
    return EXIT_OK if report.ok else EXIT_PREMISES


def cmd_classify(args, out: TextIO) -> int:
    if args.n < 1:
        raise UsageError("N must be positive")
    atlas = compute_atlas(load_map(args))
    u = args.u
    if u is None:
        idx = atlas.cycle_index(args.n)
        if idx < 0:
            u = None
        else:
            u = atlas.cycles[idx][0]
    if u is None:
        payload = {"n": str(args.n), "cycle_index": -1, "reaches_zero": True}
        if args.format == "json":
            _dump(payload, out)
        else:
            out.write(f"{args.n} reaches 0\n")
        return EXIT_OK
    atlas.locate(u)
    cls = classify(atlas, args.n, u)
    if args.format == "json":
        _dump(cls.to_json(), out)
    else:
        tag = "is" if cls.is_u_integer else "is not"
        out.write(f"{args.n} {tag} a {u}-integer (cycle {cls.cycle_index}, enters after {cls.entry_steps} steps")
        if cls.is_u_integer:
            out.write(f", reaches {u} after {cls.steps_to_u}, phase {cls.phase} of {cls.cycle_length}")
        out.write(")\n")
    return EXIT_OK


def cmd_sieve(args, out: TextIO) -> int:
    if args.bound < 1 or args.min_len < 1:
        raise UsageError("--bound and --min-len must be positive")
    atlas = compute_atlas(load_map(args))
    atlas.locate(args.u)
    sieve = Sieve(atlas, cap=min(10**6, args.bound))
    records = sieve.iter_runs(args.u, args.bound, args.min_len, _threads(args))
    if args.csv:
        records = list(records)
        with open(args.csv, "w", newline="") as fp:
            write_csv(records, fp)
    if args.format == "json":
        write_jsonl(records, out)
    else:
        count = 0
        for rec in records:
            out.write(f"{rec.start}..{rec.stop - 1} (length {rec.length}){' clipped' if rec.clipped else ''}\n")
            count += 1
        out.write(f"{count} runs of length >= {args.min_len} up to {args.bound}\n")
    return EXIT_OK


def cmd_witness(args, out: TextIO) -> int:
    map = load_map(args)
    report = check_premises(map)
    if not report.ok:
        raise PremiseError("; ".join(report.reasons))
    atlas = compute_atlas(map)
    strategy = Strategy(args.strategy)
    kind = args.kind
    if kind == "shift":
        _need(args, "x", "m", "r")
        trace = shift_witness(map, args.x, args.m, args.r, strategy, depth_limit=args.depth_limit, budget=args.budget)
    elif kind == "preimage":
        _need(args, "u", "a")
        trace = congruent_u_preimage(atlas, args.u, args.a, args.h, strategy,
                                     depth_limit=args.depth_limit, budget=args.budget)
    elif kind == "pair":
        _need(args, "u", "x")
        trace = concurrent_pair(atlas, args.u, args.x, strategy, budget=args.budget)
    elif kind == "shiftall":
        _need(args, "u")
        trace = shift_all_witness(atlas, args.u, strategy, budget=args.budget)
    else:
        _need(args, "u", "n")
        trace = consecutive_run(atlas, args.u, args.n, strategy, budget=args.budget)
    verification = verify_witness(atlas, trace)
    if args.format == "json":
        _dump({"trace": trace.to_json(), "verification": verification.to_json()}, out)
    else:
        out.write(f"{kind} witness ({strategy.value}): {_describe(trace.witness)}\n")
        out.write(f"verification: {'ok' if verification.ok else 'FAILED'} ({len(verification.checks)} checks)\n")
        for c in verification.failures:
            out.write(f"  failed: {c.name} {c.detail}\n")
    return EXIT_OK


def cmd_happy(args, out: TextIO) -> int:
    if args.e < 2 or args.b < 2:
        raise UsageError("need --e >= 2 and --b >= 2")
    pan = pan_condition(args.e, args.b)
    cert = construct_g(args.e, args.b) if pan else None
    if args.format == "json":
        _dump({"pan": pan.to_json(), "certificate": cert.to_json() if cert else None}, out)
    else:
        out.write(f"condition (p - 1) does not divide (e - 1) for e={args.e}, b={args.b}: {'holds' if pan else 'fails'}\n")
        for p, pm, div in pan.primes:
            out.write(f"  p={p}: {pm} {'divides' if div else 'does not divide'} {args.e - 1}\n")
        if cert:
            out.write(f"digit g = {cert.g}, gcd(f(g) - g, f(b-1)) = {cert.gcd_value}, "
                      f"certificate {'ok' if cert.ok else 'FAILED'}\n")
    if cert is None:
        return EXIT_PREMISES
    return EXIT_OK if cert.ok else EXIT_PREMISES


COMMANDS: dict[str, Callable[[argparse.Namespace, TextIO], int]] = {
    "analyze": cmd_analyze,
    "check": cmd_check,
    "classify": cmd_classify,
    "sieve": cmd_sieve,
    "witness": cmd_witness,
    "happy": cmd_happy,
}


# -- helpers -------------------------------------------------------------------


def load_schema(name: str) -> dict[str, Any]:
    """The shipped JSON schema for a command's output (or "map", "error")."""
    text = resources.files("digitmap").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        return args.threads
    return default_threads()


def _dump(payload: Any, out: TextIO) -> None:
    out.write(json.dumps(payload, sort_keys=True) + "\n")


def _describe(v: Any) -> str:
    if isinstance(v, int):
        s = str(v)
        return s if len(s) <= 60 else f"{s[:25]}...{s[-25:]} ({len(s)} digits)"
    enc = json.dumps(value_to_json(v), sort_keys=True)
    return enc if len(enc) <= 200 else enc[:200] + "..."


def _error(exc: BaseException, code: int, fmt: str, out: TextIO, err: TextIO) -> int:
    if fmt == "json":
        _dump({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}, out)
    else:
        err.write(f"digitmap: {exc}\n")
    return code


def main(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = out or sys.stdout
    err = err or sys.stderr
    fmt = "json" if "--format=json" in argv or any(
        a == "--format" and i + 1 < len(argv) and argv[i + 1] == "json" for i, a in enumerate(argv)
    ) else "text"
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except PremiseError as exc:
        return _error(exc, EXIT_PREMISES, fmt, out, err)
    except (BudgetExceeded, DepthExceeded, StrategyInfeasible, SymbolicError) as exc:
        return _error(exc, EXIT_LIMIT, fmt, out, err)
    except (UsageError, DigitMapError, WitnessError, ValueError) as exc:
        return _error(exc, EXIT_INPUT, fmt, out, err)


if __name__ == "__main__":
    sys.exit(main())
