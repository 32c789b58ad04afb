"""Reachability of ``return true``.

Two routes are available.  ``direct`` evaluates the source program.
``via-cps`` type-checks it under the ATM system, transforms the derivation
into a handler-free program and evaluates that.  Both evaluations are
bounded, with exact cycle detection; a run that neither finishes nor cycles
within the budget gives the honest verdict Unknown.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import terms as T
from .atm import check_program_atm
from .cps import CpsError, cps_program
from .errors import RouteDisagreement
from .evaluator import BudgetExhausted, CycleDetected, Returned, Stuck, default_budget, evaluate
from .simple_check import check_st

YES = "Yes"
NO = "No"
UNKNOWN = "Unknown"

DIRECT = "direct"
VIA_CPS = "via-cps"
AUTO = "auto"
ROUTES = (AUTO, DIRECT, VIA_CPS)


class AtmUntypable(ValueError):
    """Route via-cps was requested for a program without an ATM derivation."""


@dataclass(frozen=True)
class ReachVerdict:
    """``verdict`` is Yes, No or Unknown.  ``reason`` explains No (stuck,
    cycle, returned-other) and Unknown (budget, or cancelled when the other
    route decided first); ``steps`` counts the
    evaluation steps of the route that decided."""

    verdict: str
    route: str
    steps: int
    reason: Optional[str] = None
    max_active_handlers: int = 0

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "route": self.route,
            "steps": self.steps,
            "stats": {"max_active_handlers": self.max_active_handlers},
        }
        if self.reason is not None:
            out["reason"] = self.reason
        return out


def verdict_of(outcome, stats, route: str) -> ReachVerdict:
    if isinstance(outcome, Returned):
        v = outcome.value
        if type(v) is T.BoolV and v.value:
            return ReachVerdict(YES, route, stats.steps, None, stats.max_active_handlers)
        return ReachVerdict(NO, route, stats.steps, "returned-other", stats.max_active_handlers)
    if isinstance(outcome, Stuck):
        return ReachVerdict(NO, route, stats.steps, "stuck", stats.max_active_handlers)
    if isinstance(outcome, CycleDetected):
        return ReachVerdict(NO, route, stats.steps, "cycle", stats.max_active_handlers)
    assert isinstance(outcome, BudgetExhausted)
    return ReachVerdict(UNKNOWN, route, stats.steps, "budget", stats.max_active_handlers)


def _finish(outcome, stats, route: str, stop) -> ReachVerdict:
    v = verdict_of(outcome, stats, route)
    if stop is None:
        return v
    if v.verdict != UNKNOWN:
        stop.set()
    elif stop.is_set() and stats.steps < stop.budget:
        v = ReachVerdict(UNKNOWN, route, stats.steps, "cancelled", stats.max_active_handlers)
    return v


class _Race(threading.Event):
    """Set by the first route with a definite verdict; the other route then
    stops early."""

    def __init__(self, budget: int):
        super().__init__()
        self.budget = budget


def run_direct(program, budget: int, stop=None) -> ReachVerdict:
    outcome, stats = evaluate(program.core(), budget, stop=stop)
    return _finish(outcome, stats, DIRECT, stop)


def cps_target(program):
    """The handler-free CPS target of an ATM-typable program, or None."""
    sig = program.signature()
    d = check_program_atm(sig, program.core())
    if d is None:
        return None
    try:
        return cps_program(d, sig)
    except CpsError:
        return None


def run_via_cps(program, budget: int, target=None, stop=None) -> ReachVerdict:
    if target is None:
        target = cps_target(program)
    if target is None:
        raise AtmUntypable("the program has no ATM typing derivation the CPS transformation accepts")
    outcome, stats = evaluate(target, budget, stop=stop)
    return _finish(outcome, stats, VIA_CPS, stop)


def decide_reachability(program, budget: int | None = None, route: str = AUTO) -> ReachVerdict:
    """Decide whether ``program`` reaches ``return true`` within ``budget``
    steps.  ``auto`` runs both routes side by side when the program has a
    CPS target.  The first definite verdict cancels the other run; if both
    finish with definite verdicts they must agree (else
    ``RouteDisagreement``) and the CPS one is reported."""
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    if budget is None:
        budget = default_budget()
    if route == DIRECT:
        return run_direct(program, budget)
    if route == VIA_CPS:
        return run_via_cps(program, budget)
    target = cps_target(program)
    if target is None:
        return run_direct(program, budget)
    race = _Race(budget)
    with ThreadPoolExecutor(max_workers=2) as pool:
        via = pool.submit(run_via_cps, program, budget, target, race)
        direct = pool.submit(run_direct, program, budget, race)
        v_cps, v_direct = via.result(), direct.result()
    if v_cps.verdict != UNKNOWN and v_direct.verdict != UNKNOWN and v_cps.verdict != v_direct.verdict:
        raise RouteDisagreement(f"via-cps says {v_cps.verdict}, direct says {v_direct.verdict}")
    if v_cps.verdict == UNKNOWN and v_direct.verdict != UNKNOWN:
        return v_direct
    return v_cps


class Typability(NamedTuple):
    st: bool
    atm: bool


def typability_matrix(program) -> Typability:
    sig = program.signature()
    core = program.core()
    return Typability(check_st(sig, {}, core) is not None, check_program_atm(sig, core) is not None)
