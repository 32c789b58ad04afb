import pytest

from feh import terms as T
from feh.atm import check_atm, check_program_atm, subtype, value_type
from feh.cps import CpsError, as_comp, check_signature, cps_program, cps_sub, cps_term, cps_type, static_apply
from feh.evaluator import Returned, evaluate
from feh.library import load_program
from feh.parser import parse, parse_term, parse_type
from feh.sugar import expand_sugar, expand_value
from feh.simple_check import check_st
from feh.types import BOOL, UNIT, Arrow, Eff, Pure, RecordType, Signature

EMPTY = Signature()
C_EX3_SIG = load_program("c_ex3").signature()


def core(text):
    return expand_sugar(parse_term(text))


def value(text):
    return expand_value(parse_term(text))


def test_cps_type_pure():
    assert cps_type(Pure(BOOL)) == BOOL


def test_cps_type_of_c_ex3_operation():
    rho = Eff(UNIT, Pure(UNIT), Pure(BOOL))
    record = RecordType((("op", Arrow(UNIT, Arrow(Arrow(UNIT, UNIT), BOOL))),))
    assert cps_type(C_EX3_SIG) == record
    assert cps_type(rho, C_EX3_SIG) == Arrow(record, Arrow(Arrow(UNIT, UNIT), BOOL))


def test_effectful_types_need_the_signature():
    with pytest.raises(CpsError):
        cps_type(Eff(UNIT, Pure(UNIT), Pure(UNIT)))


def test_signature_with_effectful_operation_types_is_rejected():
    text = "signature atm {\n effect op : (Unit -> Unit / Unit / pure => Unit / pure) -> Unit / Unit / pure => Unit / pure\n}\nmain ()"
    with pytest.raises(CpsError):
        check_signature(parse(text).signature())


def test_static_apply():
    assert static_apply(value("fun x -> return x"), T.TRUE) == T.TRUE
    assert static_apply(value("fun x -> if x then false else true"), T.TRUE) == core("if true then false else true")
    g = T.Var("g")
    assert static_apply(g, T.TRUE) == T.App(g, T.TRUE)
    residual = static_apply(g, core("let y = return true in return y"))
    assert isinstance(residual, T.Let) and isinstance(residual.body, T.App)


def test_nested_static_applications_reduce():
    # the S-Embed shape: coercion @ (k @ (coercion @ x)) with all heads lambdas
    ident = value("fun (y : Bool) -> return y")
    k = value("fun (z : Bool) -> if z then false else true")
    out = static_apply(ident, static_apply(k, static_apply(ident, T.Var("x"))))
    assert out == core("if x then false else true")


def test_cps_sub_base_is_identity():
    out = cps_sub(subtype(BOOL, BOOL))
    assert T.alpha_equivalent(out, value("fun (x : Bool) -> return x"))


def test_cps_sub_embed():
    rho = Pure(UNIT)
    out = cps_sub(subtype(Pure(BOOL), Eff(BOOL, rho, rho)), C_EX3_SIG)
    assert isinstance(out, T.Lam)
    h = out.body.value
    k = h.body.value
    assert k.body == T.App(T.Var(k.var), T.Var(out.var))
    assert check_st(C_EX3_SIG, {}, out) == Arrow(BOOL, cps_type(Eff(BOOL, rho, rho), C_EX3_SIG))


def test_cps_sub_rejects_invalid_derivation():
    import dataclasses

    bad = dataclasses.replace(subtype(BOOL, BOOL), rhs=UNIT)
    with pytest.raises(CpsError):
        cps_sub(bad)


def test_t_ret_gives_the_bare_value():
    d = check_atm(EMPTY, {}, core("return true"), Pure(BOOL))
    assert cps_term(d) == T.TRUE


def test_t_lam():
    d = check_atm(EMPTY, {}, value("fun (x : Bool) -> if x then false else true"))
    out = cps_term(d)
    assert isinstance(out, T.Lam) and out.var == "x" and out.body == core("if x then false else true")


@pytest.mark.parametrize("name", ["c_ex1", "c_ex2", "c_ex3"])
def test_corpus_targets(name):
    p = load_program(name)
    sig = p.signature()
    d = check_program_atm(sig, p.core())
    target = cps_program(d, sig)
    assert not T.contains(target, (T.Handle, T.Op))
    assert check_st(sig, {}, target) == cps_type(d.type, sig) == BOOL
    src, _ = evaluate(p.core(), 10**6)
    out, _ = evaluate(target, 10**6)
    assert src == out == Returned(T.TRUE)


def test_transformation_is_deterministic():
    p = load_program("c_ex1")
    sig = p.signature()
    a = cps_program(check_program_atm(sig, p.core()), sig)
    b = cps_program(check_program_atm(sig, p.core()), sig)
    assert a == b


CHOOSE = parse("signature atm {\n effect choose : Unit -> Bool / Bool / pure => Bool / pure\n}\nmain ()").signature()


@pytest.mark.parametrize(
    "sig, x, tau, body, v",
    [
        (EMPTY, "x", "Bool", "if x then false else true", "true"),
        (EMPTY, "x", "Unit -> Bool", "x ()", "fun (y : Unit) -> false"),
        (
            CHOOSE,
            "x",
            "Unit -> Bool / Bool / pure => Bool / pure",
            "with {return r -> r; choose(u; k) -> k true} handle x ()",
            "fun (y : Unit) -> do choose y",
        ),
        (
            CHOOSE,
            "x",
            "Bool",
            "with {return r -> if r then x else false; choose(u; k) -> k x} handle do choose ()",
            "false",
        ),
    ],
)
def test_substitution_commutes_with_the_transformation(sig, x, tau, body, v):
    tau = value_type(parse_type(tau))
    c, vv = core(body), value(v)
    dc = check_atm(sig, {x: tau}, c)
    dv = check_atm(sig, {}, vv)
    assert dc is not None and dv is not None
    d_inst = check_atm(sig, {}, T.substitute(c, x, vv), dc.type)
    left = as_comp(cps_term(d_inst, sig))
    right = as_comp(T.substitute(as_comp(cps_term(dc, sig)), x, _as_value(cps_term(dv, sig))))
    assert T.alpha_equivalent(left, right)


def _as_value(t):
    return t if isinstance(t, T.Value) else t.value
