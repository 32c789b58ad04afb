import random

import pytest
from hypothesis import given, strategies as st

from feh import terms as T
from feh.evaluator import Returned, evaluate
from feh.gen import random_programs
from feh.library import load_program
from feh.parser import parse, parse_term
from feh.simple_check import StTypeError, check_st, check_st_or_raise
from feh.sugar import expand_sugar
from feh.types import BOOL, UNIT, Arrow, RecordType, Signature

EMPTY = Signature()


def core(text):
    return expand_sugar(parse_term(text))


def test_return_true():
    assert check_st(EMPTY, {}, core("return true")) == BOOL


def test_corpus_types():
    assert check_st(*_prog("c_ex1")) == BOOL
    assert check_st(*_prog("c_ex3")) is None
    assert check_st(*_prog("c_ex4")) == Arrow(UNIT, UNIT)


def _prog(name):
    p = load_program(name)
    return p.signature(), {}, p.core()


def test_c_ex1_signature_types():
    sig = load_program("c_ex1").signature()
    pair = Arrow(Arrow(BOOL, Arrow(BOOL, BOOL)), BOOL)
    assert sig.st_entry("get") == (UNIT, pair)
    assert sig.st_entry("set") == (pair, UNIT)


def test_handler_answer_types_must_agree():
    with pytest.raises(StTypeError) as info:
        check_st_or_raise(*_prog("c_ex3"))
    assert "St-Hdlr" in str(info.value) or info.value.rule == "St-Hdlr"


def test_records_and_projections():
    c = core("let r = return {a = true, b = ()} in r.a")
    assert check_st(EMPTY, {}, c) == BOOL
    assert check_st(EMPTY, {}, core("return {a = true}")) == RecordType((("a", BOOL),))
    assert check_st(EMPTY, {}, core("let r = return {a = true} in r.b")) is None


def test_lambda_annotations():
    assert check_st(EMPTY, {}, core("fun (x : Bool) -> x")) == Arrow(BOOL, BOOL)
    with pytest.raises(StTypeError):
        check_st_or_raise(EMPTY, {}, core("fun x -> x"))
    # an unannotated lambda in head position takes the argument's type
    assert check_st(EMPTY, {}, core("(fun x -> x) true")) == BOOL


def test_rec_needs_arrow_annotation():
    assert check_st(EMPTY, {}, core("rec (f : Unit -> Unit). fun (x : Unit) -> f x")) == Arrow(UNIT, UNIT)


def test_if_branches_must_agree():
    assert check_st(EMPTY, {}, core("if true then true else ()")) is None


def test_environment_order_does_not_matter():
    env = {"a": BOOL, "b": UNIT, "c": Arrow(BOOL, BOOL)}
    c = core("let x = c a in if x then b else b")
    types = set()
    for _ in range(6):
        items = list(env.items())
        random.shuffle(items)
        types.add(check_st(EMPTY, dict(items), c))
    assert types == {UNIT}


@given(st.integers(0, 10**6))
def test_typed_recursion_free_handler_free_programs_return(seed):
    (sig, c), = random_programs(seed, 1, 5, recursion=False)
    if T.contains(c, (T.Handle, T.Op)):
        return
    if check_st(sig, {}, c) is None:
        return
    out, _ = evaluate(c, 10**5)
    assert isinstance(out, Returned)


def test_simple_entry_falls_back_to_erased_atm_entry():
    p = parse("signature atm {\n effect op : Unit -> Bool / Unit / pure => Unit / pure\n}\nmain do op ()")
    assert check_st(p.signature(), {}, p.core()) == BOOL
