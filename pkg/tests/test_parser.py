import pytest
from hypothesis import given, strategies as st

from feh import terms as T
from feh.library import EXAMPLES, MACHINES, load_machine, load_program
from feh.minsky import compile_mm
from feh.parser import ParseError, parse, parse_term, parse_type
from feh.printer import print_program, print_term
from feh.sugar import SReturn, SBool, SWith, expand_sugar
from feh.types import BOOL, UNIT, Arrow, Eff, Fun, Pure, RecordType

from conftest import term_from_seed

HEADER = "signature st {\n  effect op : Unit -> Unit\n  effect get : Unit -> Unit\n  effect set : Unit -> Unit\n}\nmain "


def test_return_true():
    assert parse_term("return true") == SReturn(SBool(True))
    assert print_term(T.Return(T.TRUE)) == "return true"


def test_handler_literal_has_one_return_and_one_op_clause():
    s = parse_term("with {return x -> x; dec(x; k) -> or (k true) (k false)} handle do dec ()")
    assert isinstance(s, SWith)
    assert s.handler.ret_var == "x"
    assert [c.op for c in s.handler.clauses] == ["dec"]


@pytest.mark.parametrize("name", EXAMPLES)
def test_corpus_round_trip(name):
    first = load_program(name)
    text = print_program(first)
    again = parse(text)
    assert T.alpha_equivalent(first.core(), again.core())
    assert print_program(again) == text  # printing is deterministic


@pytest.mark.parametrize("name", MACHINES)
def test_compiled_machine_round_trip(name):
    first = compile_mm(load_machine(name))
    assert T.alpha_equivalent(first.core(), parse(print_program(first)).core())


def test_nested_lets_print_with_in():
    c = T.Let("x", T.Return(T.TRUE), T.Let("y", T.Return(T.Var("x")), T.Return(T.Var("y"))))
    assert print_term(c).count(" in ") == 2


def test_types():
    assert parse_type("Unit -> Bool") == Arrow(UNIT, BOOL)
    assert parse_type("{a : Unit, b : Bool}") == RecordType((("a", UNIT), ("b", BOOL)))
    assert parse_type("Bool / pure") == Pure(BOOL)
    rho = parse_type("Unit / Bool / pure => Bool / pure")
    assert rho == Eff(UNIT, Pure(BOOL), Pure(BOOL))
    assert parse_type("Unit -> Bool / pure") == Fun(UNIT, Pure(BOOL))


def test_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse("main\n  let x = in x")
    assert "2:" in str(info.value)


def test_unknown_operation_is_rejected():
    with pytest.raises(ParseError, match="unknown operation"):
        parse("main do nope ()")


def test_duplicate_labels_are_rejected():
    with pytest.raises((ParseError, ValueError)):
        parse("main return {a = (), a = ()}")
    with pytest.raises((ParseError, ValueError)):
        parse(HEADER + "with {return x -> x; op(a; k) -> k a; op(a; k) -> k a} handle return ()")


def test_comments_are_ignored():
    assert parse("// hello\nmain return true // trailing\n").core() == T.Return(T.TRUE)


@given(st.integers(0, 10**6))
def test_generated_terms_round_trip(seed):
    t = term_from_seed(seed, 5, scope=())
    first = parse(HEADER + print_term(t)).core()
    second = parse(HEADER + print_term(first)).core()
    assert T.alpha_equivalent(t, first)
    assert T.alpha_equivalent(first, second)


def test_sugar_sequencing_and_value_positions():
    c = expand_sugar(parse_term("(fun x -> x) (return true); false"))
    assert isinstance(c, T.Let)
    assert T.alpha_equivalent(c.body, T.Return(T.FALSE))
