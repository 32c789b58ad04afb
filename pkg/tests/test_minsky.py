from pathlib import Path

import pytest

from feh.evaluator import evaluate
from feh.library import MACHINES, load_machine
from feh.minsky import (
    Config,
    DecOrZero,
    Halt,
    Halted,
    Inc,
    Machine,
    MachineError,
    OutOfFuel,
    compile_mm,
    compile_source,
    observed_configs,
    parse_machine,
    print_machine,
    register_value,
    run_machine,
    simulate,
)
from feh.parser import parse_term
from feh.reach import NO, UNKNOWN, YES, decide_reachability
from feh.simple_check import check_st
from feh.sugar import expand_value
from feh.types import BOOL, UNIT, Arrow

EXTRA = Path(__file__).parent / "machines"
THREE = "q0: inc r0 goto q1\nq1: ifz r0 goto q2 else dec goto q1\nq2: halt\n"


def all_machines():
    out = [(n, load_machine(n)) for n in MACHINES]
    out += [(p.stem, parse_machine(p.read_text())) for p in sorted(EXTRA.glob("*.mm"))]
    return out


def test_simulator_examples():
    assert simulate(Machine((Halt(),)), 5) == Halted(0)
    assert simulate(Machine((Inc(0, 0),)), 1000) == OutOfFuel(1000)
    assert simulate(parse_machine(THREE), 10) == Halted(3)
    assert run_machine(parse_machine(THREE), 10) == [
        Config(0, 0, 0),
        Config(1, 1, 0),
        Config(1, 0, 0),
        Config(2, 0, 0),
    ]
    with pytest.raises(ValueError):
        simulate(Machine((Halt(),)), 0)


def test_machine_validation():
    with pytest.raises(MachineError):
        Machine((Inc(2, 0),))
    with pytest.raises(MachineError):
        Machine((DecOrZero(0, 0, 5),))
    with pytest.raises(MachineError):
        parse_machine("q1: halt\n")
    with pytest.raises(MachineError):
        parse_machine("q0: jump q0\n")


@pytest.mark.parametrize("name", MACHINES)
def test_text_round_trip(name):
    m = load_machine(name)
    assert parse_machine(print_machine(m)) == m


def test_compiled_shape():
    text = compile_source(parse_machine(THREE))
    assert "let x0 = fun (y : Unit) -> do succ x0 in f1 x0 x1" in text
    assert "with {return x -> f2 x0 x1; succ(x0; k) -> f1 x0 x1} handle x0 ()" in text
    assert text.rstrip().endswith("; true")


def test_register_encoding():
    zero = expand_value(parse_term("fun (x : Unit) -> ()"))
    assert register_value(zero) == 0
    two = expand_value(
        parse_term("fun (y : Unit) -> do succ (fun (y : Unit) -> do succ (fun (x : Unit) -> ()))")
    )
    assert register_value(two) == 2
    with pytest.raises(ValueError):
        register_value(expand_value(parse_term("fun (x : Unit) -> true")))


@pytest.mark.parametrize("name, m", all_machines())
def test_compiled_programs_follow_the_machine(name, m):
    program = compile_mm(m)
    sig = program.signature()
    nat = Arrow(UNIT, UNIT)
    assert sig.st_entry("succ") == (nat, UNIT)
    assert check_st(sig, {}, program.core()) == BOOL
    seen = observed_configs(program, 3000)
    assert seen, "the run enters state q0"
    assert seen == run_machine(m, len(seen) - 1)[: len(seen)]


@pytest.mark.parametrize("name, m", all_machines())
def test_at_most_one_active_handler(name, m):
    _, stats = evaluate(compile_mm(m).core(), 20000)
    assert stats.max_active_handlers <= 1
    tests_a_register = any(isinstance(i, DecOrZero) for i in m.instrs)
    assert stats.max_active_handlers == (1 if tests_a_register else 0)


@pytest.mark.parametrize("name, m", all_machines())
def test_oracle_equivalence(name, m):
    sim = simulate(m, 2000)
    v = decide_reachability(compile_mm(m), 20000)
    if isinstance(sim, Halted):
        assert v.verdict == YES and v.steps <= 9 * sim.steps + 10
    else:
        assert v.verdict in (NO, UNKNOWN)


def test_three_state_has_one_active_handler():
    v = decide_reachability(compile_mm(parse_machine(THREE)), 10**6)
    assert v.verdict == YES and v.max_active_handlers == 1
