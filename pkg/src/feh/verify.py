"""The acceptance matrix over the shipped corpus and generated programs.

Each check returns ``(ok, detail)``; ``verify_corpus`` runs them in order
and returns ``(name, ok, detail)`` triples.
"""

from __future__ import annotations

import itertools
import time

from . import terms as T
from .atm import check_program_atm, subtype, validate_derivation
from .cps import CpsError, cps_program, cps_sub, cps_type
from .evaluator import CycleDetected, Returned, evaluate, trace
from .gen import OP_POOL, enumerate_types, random_programs, random_terms
from .library import EXAMPLES, MACHINES, load_machine, load_program
from .minsky import Halted, compile_mm, simulate
from .parser import parse, parse_term
from .printer import print_program, print_term
from .reach import NO, YES, decide_reachability, typability_matrix
from .simple_check import check_st
from .sugar import SBool
from .types import BOOL, Arrow, Eff, Pure, Signature

BUDGET = 10**6
GENERATED_BUDGET = 2 * 10**4
TERMINATION_BUDGET = 10**5
# Evaluation steps allowed per machine step, measured once on three_state
# (25 steps for 3 machine steps) and rounded up.
STEPS_PER_MACHINE_STEP = 9
STEPS_OVERHEAD = 10


def budget_for_fuel(fuel: int) -> int:
    return STEPS_PER_MACHINE_STEP * fuel + STEPS_OVERHEAD

EXPECTED_MATRIX = {
    "c_ex1": (True, True),
    "c_ex2": (True, True),
    "c_ex3": (False, True),
    "c_ex4": (True, False),
    "c_ex5": (True, False),
}


def _fail(problems: list, ok_detail: str):
    if problems:
        return False, "; ".join(problems[:5]) + (f" (+{len(problems) - 5} more)" if len(problems) > 5 else "")
    return True, ok_detail


# -- 1 ------------------------------------------------------------------------


def check_typability_matrix():
    problems = []
    for name, want in EXPECTED_MATRIX.items():
        got = tuple(typability_matrix(load_program(name)))
        if got != want:
            problems.append(f"{name}: (st, atm) = {got}, expected {want}")
    return _fail(problems, "all 5 corpus programs match")


# -- 2 ------------------------------------------------------------------------


def _timed_verdict(program, budget):
    start = time.perf_counter()
    v = decide_reachability(program, budget)
    return v, time.perf_counter() - start


def check_reachability():
    problems = []
    runs = 0
    ex1 = load_program("c_ex1")
    for s0, s1 in itertools.product((False, True), repeat=2):
        state = int(s0) + 2 * int(s1)
        v, secs = _timed_verdict(ex1.with_defs(s0=SBool(s0), s1=SBool(s1)), BUDGET)
        runs += 1
        want = (YES, None) if state in (0, 1) else (NO, "cycle")
        if (v.verdict, v.reason) != want:
            problems.append(f"c_ex1 state {state}: {v.verdict}/{v.reason}, expected {want}")
        if secs >= 1.0:
            problems.append(f"c_ex1 state {state} took {secs:.2f}s")
    ex2 = load_program("c_ex2")
    for bits in itertools.product((True, False), repeat=4):
        v, secs = _timed_verdict(ex2.with_defs(**{f"v{j}": SBool(b) for j, b in enumerate(bits)}), BUDGET)
        runs += 1
        want = YES if len(set(bits)) == 1 else NO
        if v.verdict != want:
            problems.append(f"c_ex2 {bits}: {v.verdict}, expected {want}")
        if secs >= 1.0:
            problems.append(f"c_ex2 {bits} took {secs:.2f}s")
    return _fail(problems, f"{runs} runs, each under 1 s")


# -- 3 and 4 ------------------------------------------------------------------


def typable_programs(count: int = 200, seed: int = 2, depth: int = 6):
    """``(label, sig, core, derivation, budget)`` for every ATM-typable corpus
    program followed by ``count`` generated typable programs (with recursion,
    so some of them diverge)."""
    out = []
    for name in EXAMPLES:
        p = load_program(name)
        sig, core = p.signature(), p.core()
        d = check_program_atm(sig, core)
        if d is not None:
            out.append((name, sig, core, d, BUDGET))
    rng_seed = seed
    found = 0
    while found < count:
        for i, (sig, core) in enumerate(random_programs(rng_seed, count, depth, recursion=True)):
            d = check_program_atm(sig, core)
            if d is None:
                continue
            out.append((f"gen{rng_seed}.{i}", sig, core, d, GENERATED_BUDGET))
            found += 1
            if found == count:
                break
        rng_seed += 1000
    return out


def check_typability_preservation(programs=None):
    programs = typable_programs() if programs is None else programs
    problems = []
    for label, sig, core, d, _ in programs:
        if not validate_derivation(d, sig):
            problems.append(f"{label}: derivation does not validate")
            continue
        try:
            target = cps_program(d, sig)
        except CpsError as exc:
            problems.append(f"{label}: {exc}")
            continue
        if T.contains(target, (T.Handle, T.Op)):
            problems.append(f"{label}: target contains handlers or operations")
        got, want = check_st(sig, {}, target), cps_type(d.type, sig)
        if got != want:
            problems.append(f"{label}: target type {got}, expected {want}")
    return _fail(problems, f"{len(programs)} programs, zero failures")


def outcome_class(outcome) -> str:
    if isinstance(outcome, Returned):
        v = outcome.value
        return "true" if type(v) is T.BoolV and v.value else "other"
    return "non-return"


def check_simulation(programs=None):
    programs = typable_programs() if programs is None else programs
    problems = []
    for label, sig, core, d, budget in programs:
        target = cps_program(d, sig)
        o1, _ = evaluate(core, budget)
        o2, _ = evaluate(target, budget)
        c1, c2 = outcome_class(o1), outcome_class(o2)
        if c1 != c2:
            problems.append(f"{label}: source {c1}, target {c2}")
        elif c1 != "non-return" and o1.value != o2.value:
            # the top-level type is a base type, whose translation is itself
            problems.append(f"{label}: values {print_term(o1.value)} and {print_term(o2.value)}")
    return _fail(problems, f"{len(programs)} programs agree")


# -- 5 ------------------------------------------------------------------------


def c_ex5_knot():
    """The configuration the Landin's knot run keeps returning to: the
    handled call of the stored function, applied to that function."""
    f = "(fun (x : Unit) -> (do get ()) ())"
    return load_program("c_ex5").with_main(parse_term(f"(with h_state handle {f} ()) {f}")).core()


def check_termination():
    problems = []
    count = 0
    for i, (sig, core) in enumerate(random_programs(1, 500, 6, recursion=False)):
        d = check_program_atm(sig, core)
        if d is None:
            problems.append(f"gen1.{i}: not ATM-typable")
            continue
        count += 1
        for side, term in (("source", core), ("target", cps_program(d, sig))):
            o, _ = evaluate(term, TERMINATION_BUDGET)
            if not isinstance(o, Returned):
                problems.append(f"gen1.{i} {side}: {o}")
    p = load_program("c_ex5")
    sig, core = p.signature(), p.core()
    if check_program_atm(sig, core) is not None:
        problems.append("c_ex5 is ATM-typable")
    if check_st(sig, {}, core) is None:
        problems.append("c_ex5 is not ST-typable")
    o, _ = evaluate(core, BUDGET)
    if not isinstance(o, CycleDetected):
        problems.append(f"c_ex5 evaluates to {o}")
    knot = c_ex5_knot()
    hits = [i for i, c in enumerate(trace(core, 60)) if T.alpha_equivalent(c, knot)]
    if len(hits) < 2:
        problems.append(f"c_ex5 trace reaches the knot configuration at {hits}")
    elif isinstance(o, CycleDetected) and hits[1] - hits[0] != o.period:
        problems.append(f"knot configuration repeats every {hits[1] - hits[0]} steps, cycle period {o.period}")
    return _fail(problems, f"{count} programs return on both sides; c_ex5 cycles through the knot configuration at steps {hits[:2]}")


# -- 6 ------------------------------------------------------------------------


def check_minsky():
    problems = []
    summary = []
    for name in MACHINES:
        m = load_machine(name)
        program = compile_mm(m)
        ty = check_st(program.signature(), {}, program.core())
        if ty != BOOL:
            problems.append(f"{name}: simple type {ty}, expected Bool")
        sim = simulate(m, BUDGET)
        halted = isinstance(sim, Halted)
        v = decide_reachability(program, BUDGET)
        if halted and v.verdict != YES:
            problems.append(f"{name}: halts but verdict {v.verdict}")
        if halted and v.steps > budget_for_fuel(sim.steps):
            problems.append(f"{name}: {v.steps} steps for {sim.steps} machine steps")
        if not halted and v.verdict == YES:
            problems.append(f"{name}: does not halt but verdict Yes")
        if v.max_active_handlers != 1:
            problems.append(f"{name}: max active handlers {v.max_active_handlers}")
        summary.append(f"{name}={v.verdict}")
    return _fail(problems, ", ".join(summary))


# -- 7 ------------------------------------------------------------------------


def check_subtyping(depth: int = 3):
    values, comps = enumerate_types(depth)
    everything = values + comps
    problems = []
    above = {}
    for a in everything:
        if subtype(a, a) is None:
            problems.append(f"not reflexive at {a}")
        above[a] = [b for b in everything if subtype(a, b) is not None]
    pairs = sum(len(v) for v in above.values())
    for a, ups in above.items():
        for b in ups:
            for c in above[b]:
                if subtype(a, c) is None:
                    problems.append(f"not transitive: {a} <= {b} <= {c}")
    # rho <= tau/rho'=>rho forces rho' pure: checked over the enumeration and
    # over every effectful type built from smaller enumerated parts
    small_values, small_comps = enumerate_types(depth - 1)
    forced = 0
    for rho in comps:
        candidates = [e for e in comps if isinstance(e, Eff) and e.ans_out == rho]
        candidates += [Eff(t, r, rho) for t in small_values for r in small_comps]
        for e in candidates:
            if subtype(rho, e) is not None:
                forced += 1
                if not isinstance(e.ans_in, Pure):
                    problems.append(f"impure incoming answer: {rho} <= {e}")
    sig = Signature({}, {"choose": OP_POOL["choose"]})
    for a, ups in above.items():
        for b in ups:
            term = cps_sub(subtype(a, b), sig)
            want = Arrow(cps_type(a, sig), cps_type(b, sig))
            if check_st(sig, {}, term) != want:
                problems.append(f"coercion for {a} <= {b} does not check at {want}")
    return _fail(
        problems,
        f"{len(everything)} types, {pairs} related pairs, {forced} pure-answer instances, all coercions typed",
    )


# -- 8 ------------------------------------------------------------------------

_GENERATED_OPS = ("op", "get", "set") + tuple(OP_POOL)
# Parsing only needs the operations declared; their types play no part.
_ROUND_TRIP_SIG = (
    "signature st {\n"
    + "".join(f"  effect {op} : Unit -> Unit\n" for op in _GENERATED_OPS)
    + "}\nmain "
)


def check_round_trip(count: int = 1000):
    problems = []
    names = [f"{n}.feh" for n in EXAMPLES]
    for name in EXAMPLES:
        first = load_program(name)
        again = parse(print_program(first))
        if not T.alpha_equivalent(first.core(), parse(print_program(again)).core()):
            problems.append(f"{name}.feh")
    for name in MACHINES:
        first = compile_mm(load_machine(name))
        if not T.alpha_equivalent(first.core(), parse(print_program(first)).core()):
            problems.append(f"compiled {name}")
        names.append(f"compiled {name}")
    half = count // 2
    generated = random_terms(3, count - half, 5)
    generated += [core for _, core in random_programs(4, half, 6, recursion=True)]
    for i, term in enumerate(generated):
        try:
            first = parse(_ROUND_TRIP_SIG + print_term(term)).core()
            second = parse(_ROUND_TRIP_SIG + print_term(first)).core()
        except Exception as exc:  # any parse failure is a round-trip failure
            problems.append(f"generated term {i}: {exc}")
            continue
        if not (T.alpha_equivalent(first, second) and T.alpha_equivalent(term, first)):
            problems.append(f"generated term {i}")
    return _fail(problems, f"{len(names)} corpus files and {len(generated)} generated terms")


CRITERIA = (
    ("1 typability matrix", check_typability_matrix),
    ("2 reachability verdicts", check_reachability),
    ("3 typability preservation", check_typability_preservation),
    ("4 simulation", check_simulation),
    ("5 recursion-free termination", check_termination),
    ("6 Minsky oracle", check_minsky),
    ("7 subtyping properties", check_subtyping),
    ("8 round trip", check_round_trip),
)


def format_line(name: str, ok: bool, detail: str, secs: float | None = None) -> str:
    timing = f" [{secs:.1f}s]" if secs is not None else ""
    return f"{'PASS' if ok else 'FAIL'} {name}: {detail}{timing}"


def verify_corpus(print_line=None) -> list:
    results = []
    for name, check in CRITERIA:
        start = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # report, then carry on with the other criteria
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
        if print_line is not None:
            print_line(format_line(name, ok, detail, time.perf_counter() - start))
    return results
