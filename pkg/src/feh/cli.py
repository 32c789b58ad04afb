"""Command-line front end.

Exit codes: 0 success or Yes, 1 No or untypable, 2 Unknown (budget or fuel
exhausted), 3 usage or internal error.  ``--json`` output goes to standard
output only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import terms as T
from .atm import AtmTypeError, check_program_atm_or_raise
from .cps import CpsError, cps_program, cps_type
from .errors import DynamicTypeError, RouteDisagreement
from .evaluator import BudgetExhausted, CycleDetected, Returned, Stuck, default_budget, evaluate, trace
from .minsky import Halted, MachineError, compile_source, load_machine, simulate
from .parser import ParseError, parse, parse_file
from .printer import print_program, print_term
from .reach import ROUTES, AtmUntypable, decide_reachability
from .simple_check import StTypeError, check_st_or_raise

OK, NO, UNKNOWN, ERROR = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _budget(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("budget must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="feh", description="Effect-handler calculus workbench.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse a program and check that printing round-trips")
    p.add_argument("file")

    p = sub.add_parser("run", help="evaluate a program")
    p.add_argument("file")
    p.add_argument("--budget", type=_budget)
    p.add_argument("--trace", action="store_true", help="print every configuration")

    p = sub.add_parser("check", help="type-check a program")
    p.add_argument("file")
    p.add_argument("--system", choices=("st", "atm"), required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("cps", help="CPS-transform an ATM-typable program")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--deriv", help="also write the typing derivation as JSON")

    p = sub.add_parser("reach", help="decide whether a program reaches return true")
    p.add_argument("file")
    p.add_argument("--route", choices=ROUTES, default="auto")
    p.add_argument("--budget", type=_budget)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("minsky", help="two-register Minsky machines")
    msub = p.add_subparsers(dest="mcmd", required=True, parser_class=_Parser)
    q = msub.add_parser("simulate")
    q.add_argument("file")
    q.add_argument("--fuel", type=_budget, required=True)
    q = msub.add_parser("compile")
    q.add_argument("file")
    q.add_argument("-o", "--output", required=True)

    p = sub.add_parser("corpus", help="shipped corpus")
    csub = p.add_subparsers(dest="ccmd", required=True, parser_class=_Parser)
    csub.add_parser("verify", help="run the acceptance matrix")
    return ap


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_parse(args) -> int:
    prog = parse_file(args.file)
    text = print_program(prog)
    again = parse(text)
    if not T.alpha_equivalent(again.core(), prog.core()):
        print("round trip changed the program", file=sys.stderr)
        return ERROR
    sys.stdout.write(text)
    return OK


def _describe(outcome) -> str:
    if isinstance(outcome, Returned):
        return f"returned {print_term(outcome.value)}"
    if isinstance(outcome, Stuck):
        return f"stuck at unhandled operation {outcome.op} {print_term(outcome.arg)} (depth {outcome.depth})"
    if isinstance(outcome, CycleDetected):
        return f"cycle detected at step {outcome.step} with period {outcome.period}"
    return f"budget exhausted after {outcome.steps} steps"


def cmd_run(args) -> int:
    prog = parse_file(args.file)
    core = prog.core()
    budget = args.budget or default_budget()
    if args.trace:
        for i, c in enumerate(trace(core, budget)):
            print(f"{i}: {print_term(c)}")
    outcome, stats = evaluate(core, budget)
    print(_describe(outcome))
    print(f"steps {stats.steps}, max active handlers {stats.max_active_handlers}")
    if isinstance(outcome, Returned):
        return OK
    if isinstance(outcome, BudgetExhausted):
        return UNKNOWN
    return NO


def cmd_check(args) -> int:
    prog = parse_file(args.file)
    sig, core = prog.signature(), prog.core()
    result = {"system": args.system}
    try:
        if args.system == "st":
            ty = check_st_or_raise(sig, {}, core)
            result.update(typable=True, type=str(ty))
        else:
            d = check_program_atm_or_raise(sig, core)
            result.update(typable=True, type=str(d.type), derivation_size=d.size())
    except (StTypeError, AtmTypeError) as exc:
        result.update(typable=False, error=str(exc))
    if args.json:
        _dump(result)
    elif result["typable"]:
        print(f"typable ({args.system}): {result['type']}")
    else:
        print(f"not typable ({args.system}): {result['error']}")
    return OK if result["typable"] else NO


def cmd_cps(args) -> int:
    prog = parse_file(args.file)
    sig, core = prog.signature(), prog.core()
    try:
        d = check_program_atm_or_raise(sig, core)
    except AtmTypeError as exc:
        print(f"not ATM-typable: {exc}", file=sys.stderr)
        return NO
    try:
        target = cps_program(d, sig)
    except CpsError as exc:
        print(f"cannot transform: {exc}", file=sys.stderr)
        return NO
    out = Path(args.output)
    header = f"// CPS target of {Path(args.file).name}; handler-free\n"
    out.write_text(header + "main " + print_term(target) + "\n", encoding="utf-8")
    sidecar = out.with_name(out.name + ".json")
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump({"source_type": str(d.type), "target_type": str(cps_type(d.type, sig))}, fh, indent=2)
        fh.write("\n")
    if args.deriv:
        with open(args.deriv, "w", encoding="utf-8") as fh:
            json.dump(d.to_json(), fh, indent=1)
            fh.write("\n")
    print(f"wrote {out} ({cps_type(d.type, sig)})")
    return OK


def cmd_reach(args) -> int:
    prog = parse_file(args.file)
    try:
        v = decide_reachability(prog, args.budget, args.route)
    except AtmUntypable as exc:
        if args.json:
            _dump({"verdict": None, "route": args.route, "error": str(exc)})
        else:
            print(f"not ATM-typable: {exc}", file=sys.stderr)
        return NO
    if args.json:
        _dump(v.to_json())
    else:
        reason = f" ({v.reason})" if v.reason else ""
        print(f"{v.verdict}{reason} via {v.route} after {v.steps} steps")
    return {"Yes": OK, "No": NO}.get(v.verdict, UNKNOWN)


def cmd_minsky(args) -> int:
    m = load_machine(args.file)
    if args.mcmd == "simulate":
        r = simulate(m, args.fuel)
        if isinstance(r, Halted):
            print(f"halted after {r.steps} steps")
            return OK
        print(f"out of fuel after {r.fuel} steps")
        return UNKNOWN
    Path(args.output).write_text(compile_source(m), encoding="utf-8")
    print(f"wrote {args.output}")
    return OK


def cmd_corpus(args) -> int:
    from .verify import verify_corpus

    results = verify_corpus(print_line=print)
    return OK if all(ok for _, ok, _ in results) else NO


COMMANDS = {
    "parse": cmd_parse,
    "run": cmd_run,
    "check": cmd_check,
    "cps": cmd_cps,
    "reach": cmd_reach,
    "minsky": cmd_minsky,
    "corpus": cmd_corpus,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return ERROR
    except SystemExit as exc:  # --help
        return OK if exc.code in (0, None) else ERROR
    try:
        return COMMANDS[args.cmd](args)
    except (ParseError, MachineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except (RouteDisagreement, DynamicTypeError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
