import itertools
import json

import pytest

from feh.errors import RouteDisagreement
from feh.gen import random_programs
from feh.library import load_program
from feh.parser import parse
from feh.reach import (
    DIRECT,
    NO,
    UNKNOWN,
    VIA_CPS,
    YES,
    AtmUntypable,
    ReachVerdict,
    decide_reachability,
    typability_matrix,
)
from feh.sugar import SBool
from feh.atm import check_program_atm
from feh.cps import cps_program
from feh.evaluator import evaluate


def ex1(state):
    s0, s1 = bool(state & 1), bool(state & 2)
    return load_program("c_ex1").with_defs(s0=SBool(s0), s1=SBool(s1))


def test_c_ex1_yes_from_zero():
    v = decide_reachability(ex1(0))
    assert v.verdict == YES and v.route == VIA_CPS


@pytest.mark.parametrize("state", [2, 3])
def test_c_ex1_no_from_two_and_three(state):
    v = decide_reachability(ex1(state))
    assert (v.verdict, v.reason, v.route) == (NO, "cycle", DIRECT)


def test_c_ex2_all_instantiations():
    p = load_program("c_ex2")
    yes = []
    for bits in itertools.product((True, False), repeat=4):
        v = decide_reachability(p.with_defs(**{f"v{i}": SBool(b) for i, b in enumerate(bits)}))
        assert v.verdict in (YES, NO)
        if v.verdict == YES:
            yes.append(bits)
    assert yes == [(True,) * 4, (False,) * 4]


def test_routes():
    p = ex1(0)
    assert decide_reachability(p, route=DIRECT).route == DIRECT
    assert decide_reachability(p, route=VIA_CPS).route == VIA_CPS
    with pytest.raises(ValueError):
        decide_reachability(p, route="sideways")


def test_via_cps_needs_atm_typability():
    with pytest.raises(AtmUntypable):
        decide_reachability(load_program("c_ex4"), route=VIA_CPS)
    v = decide_reachability(load_program("c_ex5"), 10**5)
    assert v.route == DIRECT and (v.verdict, v.reason) == (NO, "cycle")


def test_unknown_on_budget():
    p = ex1(2)
    v = decide_reachability(p, 10, route=VIA_CPS)
    assert (v.verdict, v.reason) == (UNKNOWN, "budget")


def test_stuck_and_returned_other():
    sig = "signature st {\n effect op : Unit -> Unit\n}\n"
    assert decide_reachability(parse(sig + "main do op (); true")).reason == "stuck"
    v = decide_reachability(parse("main return false"))
    assert (v.verdict, v.reason) == (NO, "returned-other")


def test_verdict_json_shape():
    data = json.loads(json.dumps(decide_reachability(ex1(0)).to_json()))
    assert set(data) == {"verdict", "route", "steps", "stats"}
    assert set(data["stats"]) == {"max_active_handlers"}
    data = decide_reachability(ex1(3)).to_json()
    assert data["reason"] == "cycle"


def test_typability_matrix():
    assert tuple(typability_matrix(load_program("c_ex1"))) == (True, True)
    assert tuple(typability_matrix(load_program("c_ex3"))) == (False, True)
    assert tuple(typability_matrix(load_program("c_ex4"))) == (True, False)


def test_disagreement_is_reported(monkeypatch):
    import feh.reach as reach

    def lying_direct(program, budget, stop=None):
        return ReachVerdict(NO, DIRECT, 1, "stuck")

    def slow_cps(program, budget, target=None, stop=None):
        import time

        time.sleep(0.05)
        return ReachVerdict(YES, VIA_CPS, 1)

    monkeypatch.setattr(reach, "run_direct", lying_direct)
    monkeypatch.setattr(reach, "run_via_cps", slow_cps)
    with pytest.raises(RouteDisagreement):
        decide_reachability(ex1(0))


def test_recursion_free_targets_never_unknown():
    count = 0
    for sig, c in random_programs(11, 100, 6, recursion=False):
        d = check_program_atm(sig, c)
        if d is None:
            continue
        count += 1
        out, _ = evaluate(cps_program(d, sig), 10**6)
        assert out.kind == "returned"
    assert count > 50
