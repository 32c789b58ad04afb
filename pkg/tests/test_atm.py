import dataclasses
import json

import pytest

from feh import terms as T
from feh.atm import (
    AtmTypeError,
    check_atm,
    check_atm_or_raise,
    check_program_atm,
    check_program_atm_or_raise,
    compose,
    refl,
    subtype,
    validate_derivation,
    validate_sub,
)
from feh.evaluator import trace
from feh.gen import enumerate_types
from feh.library import load_program
from feh.parser import parse, parse_term
from feh.sugar import expand_sugar
from feh.types import BOOL, UNIT, Eff, Fun, Pure, Signature

EMPTY = Signature()
RHO = Pure(UNIT)


def core(text):
    return expand_sugar(parse_term(text))


def _prog(name):
    p = load_program(name)
    return p.signature(), p.core()


def _walk(d):
    seen, stack = set(), [d]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.premises)


# -- subtyping ------------------------------------------------------------------


def test_subtype_examples():
    assert subtype(BOOL, BOOL).rule == "S-Base"
    for rho in (Pure(UNIT), Eff(BOOL, Pure(BOOL), Pure(UNIT))):
        d = subtype(Pure(BOOL), Eff(BOOL, rho, rho))
        assert d.rule == "S-Embed" and validate_sub(d)
    assert subtype(Eff(BOOL, RHO, RHO), Pure(BOOL)) is None
    assert subtype(BOOL, UNIT) is None


def test_subtype_arrow_and_ipure_shapes():
    d = subtype(Fun(BOOL, Pure(BOOL)), Fun(BOOL, Eff(BOOL, RHO, RHO)))
    assert d.rule == "S-Arr" and [p.rule for p in d.premises] == ["S-Base", "S-Embed"]
    e = Eff(BOOL, RHO, RHO)
    d = subtype(e, e)
    assert d.rule == "S-Ipure" and len(d.premises) == 3


def test_refl_and_compose():
    values, comps = enumerate_types(2)
    for t in values + comps:
        assert validate_sub(refl(t))
        assert refl(t).lhs == refl(t).rhs == t
    a, b = Pure(BOOL), Eff(BOOL, RHO, RHO)
    d = compose(subtype(a, a), subtype(a, b))
    assert d is not None and (d.lhs, d.rhs) == (a, b) and validate_sub(d)
    assert compose(subtype(a, b), subtype(a, a)) is None  # endpoints do not chain


def test_embedding_into_own_answer_forces_pure_incoming_answer():
    values, comps = enumerate_types(2)
    for rho in comps:
        for tau in values:
            for rho2 in comps:
                if subtype(rho, Eff(tau, rho2, rho)) is not None:
                    assert isinstance(rho2, Pure)


def test_sub_derivation_json():
    d = subtype(Pure(BOOL), Eff(BOOL, RHO, RHO))
    data = json.loads(json.dumps(d.to_json()))
    assert data["rule"] == "S-Embed"


# -- typing -------------------------------------------------------------------


def test_return_true_is_t_ret_over_t_bool():
    d = check_atm(EMPTY, {}, core("return true"), Pure(BOOL))
    assert d.rule == "T-Ret" and d.premises[0].rule == "T-Bool"
    assert validate_derivation(d)


def test_c_ex3_types_at_bool_pure():
    sig, c = _prog("c_ex3")
    d = check_program_atm(sig, c)
    assert d.type == Pure(BOOL)
    assert validate_derivation(d, sig)


def test_c_ex1_needs_no_let_ip_in_clauses():
    sig, c = _prog("c_ex1")
    d = check_program_atm(sig, c)
    assert d.type == Pure(BOOL) and validate_derivation(d, sig)
    for n in _walk(d):
        if n.rule == "T-Hdlr":
            for clause in n.premises:
                assert all(m.rule != "T-LetIp" for m in _walk(clause))


def test_rejections_carry_error_kinds():
    sig, c = _prog("c_ex4")
    with pytest.raises(AtmTypeError) as info:
        check_program_atm_or_raise(sig, c)
    assert info.value.kind == "answer-type-mismatch"
    sig, c = _prog("c_ex5")
    assert check_program_atm(sig, c) is None
    with pytest.raises(AtmTypeError) as info:
        check_program_atm_or_raise(sig, c)
    assert info.value.kind == "rule-mismatch"


def test_needs_annotation():
    with pytest.raises(AtmTypeError) as info:
        check_atm_or_raise(EMPTY, {}, core("fun x -> x"))
    assert info.value.kind == "needs-annotation"


def test_top_level_type_must_be_pure():
    p = parse("signature atm {\n effect op : Unit -> Unit / Unit / pure => Unit / pure\n}\nmain do op ()")
    assert check_atm(p.signature(), {}, p.core()) is not None
    assert check_program_atm(p.signature(), p.core()) is None


def test_handlers_must_cover_the_signature():
    text = (
        "signature atm {\n effect a : Unit -> Unit / Unit / pure => Unit / pure\n"
        " effect b : Unit -> Unit / Unit / pure => Unit / pure\n}\n"
        "main with {return x -> x; a(x; k) -> k x} handle do a ()"
    )
    p = parse(text)
    assert check_program_atm(p.signature(), p.core()) is None


def test_derivation_json_round_trips():
    sig, c = _prog("c_ex3")
    d = check_program_atm(sig, c)
    data = json.loads(json.dumps(d.to_json()))
    assert data["rule"] == d.rule and data["type"] == str(d.type)


def test_let_p_with_effectful_premise_is_invalid():
    sig, _ = _prog("c_ex3")
    c = core("let x = do op () in return x")
    d = check_atm(sig, {}, c, Eff(UNIT, Pure(UNIT), Pure(BOOL)))
    assert d.rule == "T-LetIp" and validate_derivation(d, sig)
    forged = dataclasses.replace(d, rule="T-LetP")
    assert not validate_derivation(forged, sig)


def test_csub_with_mismatched_endpoints_is_invalid():
    sig, c = _prog("c_ex1")
    d = check_program_atm(sig, c)
    node = next(n for n in _walk(d) if n.rule == "T-CSub")
    assert validate_derivation(node, sig)
    bad = dataclasses.replace(node, sub=refl(Pure(UNIT)) if node.type != Pure(UNIT) else refl(Pure(BOOL)))
    assert not validate_derivation(bad, sig)


def test_wrong_type_at_a_leaf_is_invalid():
    d = check_atm(EMPTY, {}, core("return true"), Pure(BOOL))
    leaf = dataclasses.replace(d.premises[0], type=UNIT)
    assert not validate_derivation(dataclasses.replace(d, premises=(leaf,)))


@pytest.mark.parametrize("name", ["c_ex1", "c_ex2", "c_ex3"])
def test_preservation_along_trace_prefixes(name):
    sig, c = _prog(name)
    want = check_program_atm(sig, c).type
    for config in trace(c, 200):
        d = check_atm(sig, {}, config, want)
        assert d is not None and d.type == want and validate_derivation(d, sig)
