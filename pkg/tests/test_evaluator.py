import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from feh import terms as T
from feh.atm import check_program_atm
from feh.evaluator import (
    KERNEL,
    BudgetExhausted,
    CycleDetected,
    Returned,
    Stuck,
    default_budget,
    evaluate,
    step,
    trace,
)
from feh.errors import DynamicTypeError
from feh.gen import random_programs
from feh.library import load_program
from feh.parser import parse, parse_term
from feh.sugar import SBool, expand_sugar


def core(text):
    return expand_sugar(parse_term(text))


HEADER = "signature st {\n  effect op : Bool -> Unit\n  effect other : Unit -> Unit\n}\nmain "


def prog(text):
    return parse(HEADER + text).core()


def test_e_ret():
    c = core("let x = return true in if x then return true else return false")
    assert step(c) == core("if true then return true else return false")


def test_e_op_with_empty_context():
    c = prog("with {return x -> return x; op(x; k) -> return ()} handle do op true")
    assert step(c) == T.Return(T.UNIT_V)


def test_e_hret():
    c = prog("with {return x -> return false; op(x; k) -> return ()} handle return true")
    assert step(c) == T.Return(T.FALSE)


def test_e_op_captures_deep_continuation():
    c = prog("with {return x -> return x; op(x; k) -> k ()} handle let y = do op true in return false")
    nxt = step(c)
    assert isinstance(nxt, T.App)
    k = nxt.fn
    assert isinstance(k, T.Lam) and isinstance(k.body, T.Handle)


def test_values_are_normal():
    assert step(T.Return(T.TRUE)) is None
    assert trace(T.Return(T.TRUE), 10) == [T.Return(T.TRUE)]


def test_unhandled_op_is_stuck():
    out, _ = evaluate(prog("let y = do op true in return y"), 100)
    assert isinstance(out, Stuck) and out.op == "op" and out.depth == 1  # one let frame


def test_no_forwarding_to_outer_handlers():
    c = prog(
        "with {return x -> return x; other(x; k) -> k ()} handle "
        "with {return x -> return x; op(x; k) -> k ()} handle do other ()"
    )
    out, _ = evaluate(c, 100)
    assert isinstance(out, Stuck) and out.op == "other" and out.depth == 2


def test_dynamic_type_error():
    with pytest.raises(DynamicTypeError):
        evaluate(core("true ()"), 10)


def test_budget_and_trace_length():
    loop = core("(rec (f : Unit -> Unit). fun (x : Unit) -> f x) ()")
    out, stats = evaluate(loop, 50, detect_cycles=False)
    assert out == BudgetExhausted(50) and stats.steps == 50
    assert len(trace(loop, 7)) == 7
    out, _ = evaluate(loop, 50)
    assert isinstance(out, CycleDetected)


def test_budget_validation(monkeypatch):
    with pytest.raises(ValueError):
        evaluate(T.Return(T.TRUE), 0)
    with pytest.raises(ValueError):
        evaluate(core("x"), 5)
    monkeypatch.setenv("FEH_BUDGET", "123")
    assert default_budget() == 123
    monkeypatch.setenv("FEH_BUDGET", "many")
    with pytest.raises(ValueError):
        default_budget()


def _ex1(s0, s1):
    return load_program("c_ex1").with_defs(s0=SBool(s0), s1=SBool(s1)).core()


def test_c_ex1_state_zero_returns_true():
    out, stats = evaluate(_ex1(False, False), 10**6)
    assert out == Returned(T.TRUE)
    assert stats.max_active_handlers >= 1


def test_c_ex1_state_two_cycles():
    out, _ = evaluate(_ex1(False, True), 10**6)
    assert isinstance(out, CycleDetected)


def test_c_ex2_all_true_returns_true():
    out, _ = evaluate(load_program("c_ex2").core(), 10**6)
    assert out == Returned(T.TRUE)


def test_c_ex5_cycles_with_period_six():
    out, _ = evaluate(load_program("c_ex5").core(), 10**6)
    assert isinstance(out, CycleDetected) and out.period == 6


def test_step_agrees_with_evaluate():
    c = _ex1(True, False)
    n = 0
    while True:
        nxt = step(c)
        if nxt is None:
            break
        c, n = nxt, n + 1
    out, stats = evaluate(_ex1(True, False), 10**6, detect_cycles=False)
    assert out == Returned(c.value) and stats.steps == n


@given(st.integers(0, 10**6))
def test_typable_programs_never_get_stuck(seed):
    (sig, c), = random_programs(seed, 1, 5, recursion=True)
    if check_program_atm(sig, c) is None:
        return
    out, _ = evaluate(c, 5000)
    assert not isinstance(out, Stuck)


def test_pure_python_kernel_matches():
    code = (
        "from feh.evaluator import evaluate, KERNEL;"
        "from feh.library import load_program;"
        "o, s = evaluate(load_program('c_ex2').core(), 10**6);"
        "print(KERNEL, o.kind, s.steps, s.max_active_handlers)"
    )
    env = {"FEH_PURE_PYTHON": "1"}
    import os

    pure = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env={**os.environ, **env})
    out, stats = evaluate(load_program("c_ex2").core(), 10**6)
    assert pure.stdout.split() == ["python", out.kind, str(stats.steps), str(stats.max_active_handlers)]
    assert KERNEL in ("cython", "python")
