import pytest
from hypothesis import given, strategies as st

from feh import terms as T
from feh.parser import parse_term
from feh.sugar import expand_sugar

from conftest import term_from_seed


def core(text):
    return expand_sugar(parse_term(text))


def test_constructors_check_classes():
    with pytest.raises(TypeError):
        T.Return(T.Return(T.UNIT_V))
    with pytest.raises(TypeError):
        T.Lam("x", T.UNIT_V)
    with pytest.raises(ValueError):
        T.OpClause("op", "k", "k", T.Return(T.UNIT_V))
    with pytest.raises(ValueError):
        cl = T.OpClause("op", "x", "k", T.Return(T.UNIT_V))
        T.Handler("r", T.Return(T.Var("r")), [cl, cl])


def test_free_vars():
    c = core("fun x -> (x y)")
    assert T.free_vars(c) == frozenset({"y"})
    assert T.free_vars(core("let z = return w in z")) == frozenset({"w"})
    h = core("with {return r -> r; op(a; k) -> k b} handle return c")
    assert T.free_vars(h) == frozenset({"b", "c"})


def test_substitution_replaces_free_occurrences_only():
    body = core("let x = return y in (fun y -> return y)")
    out = T.substitute(body, "y", T.TRUE)
    assert out == core("let x = return true in (fun y -> return y)")


def test_substitution_avoids_capture():
    body = core("fun x -> y")  # return (fun x -> return y)
    out = T.substitute(body, "y", T.Var("x"))
    lam = out.value
    assert lam.var != "x"
    assert lam.body == T.Return(T.Var("x"))
    assert T.free_vars(out) == frozenset({"x"})


def test_substitution_in_handler_clauses_avoids_capture():
    body = core("with {return r -> y; op(a; k) -> k y} handle do op ()")
    out = T.substitute(body, "y", T.Var("k"))
    assert "k" in T.free_vars(out)
    clause = out.handler.clauses[0]
    assert clause.cont != "k"


def test_alpha_equivalence():
    assert T.alpha_equivalent(core("fun x -> x"), core("fun y -> y"))
    assert not T.alpha_equivalent(core("fun x -> y"), core("fun y -> y"))
    assert T.alpha_equivalent(
        core("with {return r -> r; op(a; k) -> k a} handle do op ()"),
        core("with {return s -> s; op(b; j) -> j b} handle do op ()"),
    )


def test_fresh_is_deterministic_and_avoids_names():
    f = T.Fresh({"x_1", "x_2"})
    assert f("x") == "x_3"
    assert f("x_3") == "x_4"
    g = T.Fresh({"x_1", "x_2"})
    assert g("x") == "x_3"


@given(st.integers(0, 10**6))
def test_alpha_normalize_is_idempotent_and_sound(seed):
    t = term_from_seed(seed)
    n = T.alpha_normalize(t)
    assert T.alpha_equivalent(t, n)
    assert T.alpha_normalize(n) == n


@given(st.integers(0, 10**6))
def test_substituting_a_fresh_variable_is_renaming(seed):
    t = term_from_seed(seed)
    fv = sorted(t.fv)
    if not fv:
        assert T.substitute(t, "nope", T.TRUE) is t
        return
    x = fv[0]
    renamed = T.substitute(t, x, T.Var("zz"))
    assert x not in renamed.fv
    assert T.alpha_equivalent(T.substitute(renamed, "zz", T.Var(x)), t)
