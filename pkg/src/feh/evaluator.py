"""Deterministic small-step evaluation with budgets, cycle detection and
active-handler instrumentation.

The stepping kernel comes in two builds with identical behavior: a compiled
Cython module (``feh._ckernel``) and the pure-Python ``feh._kernel``.  The
compiled one is used when it imports, unless ``FEH_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Union

from . import terms as T
from .errors import DynamicTypeError

__all__ = [
    "Returned",
    "Stuck",
    "CycleDetected",
    "BudgetExhausted",
    "Outcome",
    "EvalStats",
    "DynamicTypeError",
    "step",
    "evaluate",
    "trace",
    "KERNEL",
    "DEFAULT_BUDGET",
]


def _load_kernel():
    if os.environ.get("FEH_PURE_PYTHON") != "1":
        try:
            from . import _ckernel

            return _ckernel, "cython"
        except ImportError:
            pass
    from . import _kernel

    return _kernel, "python"


_K, KERNEL = _load_kernel()

DEFAULT_BUDGET = 1_000_000


def default_budget() -> int:
    env = os.environ.get("FEH_BUDGET")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"FEH_BUDGET must be an integer, got {env!r}") from None
        if value < 1:
            raise ValueError("FEH_BUDGET must be at least 1")
        return value
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class Returned:
    value: T.Value

    @property
    def kind(self) -> str:
        return "returned"


@dataclass(frozen=True)
class Stuck:
    """An operation with no handler for it (no enclosing handler, or the
    innermost handler has no clause for it)."""

    op: str
    arg: T.Value
    depth: int

    @property
    def kind(self) -> str:
        return "stuck"


@dataclass(frozen=True)
class CycleDetected:
    step: int
    period: int

    @property
    def kind(self) -> str:
        return "cycle"


@dataclass(frozen=True)
class BudgetExhausted:
    steps: int

    @property
    def kind(self) -> str:
        return "budget"


Outcome = Union[Returned, Stuck, CycleDetected, BudgetExhausted]


@dataclass(frozen=True)
class EvalStats:
    steps: int
    max_active_handlers: int


def plug(c: T.Computation, k) -> T.Computation:
    """Rebuild the whole term from a focus and its stack."""
    while k is not None:
        if k.kind == _K.LET:
            c = T.Let(k.a, c, k.b)
        else:
            c = T.Handle(k.a, c)
        k = k.next
    return c


def _check_closed(c):
    if not isinstance(c, T.Computation):
        raise TypeError("evaluation needs a computation")
    if c.fv:
        raise ValueError(f"evaluation needs a closed term; free: {sorted(c.fv)}")


def step(c: T.Computation) -> Optional[T.Computation]:
    """The unique successor of ``c``, or None at ``return v`` and at an
    unhandled operation."""
    _check_closed(c)
    focus, k = _K.refocus(c, None)
    status, focus, k = _K.reduce(focus, k)
    if status != _K.STEPPED:
        return None
    return plug(focus, k)


def evaluate(
    c: T.Computation, budget: int | None = None, detect_cycles: bool = True, stop=None
) -> tuple[Outcome, EvalStats]:
    """Run ``c`` for at most ``budget`` steps.  A ``stop`` event (for example
    a ``threading.Event``) that becomes set ends the run early with
    ``BudgetExhausted``."""
    _check_closed(c)
    if budget is None:
        budget = default_budget()
    if budget < 1:
        raise ValueError("budget must be at least 1")
    focus, k = _K.refocus(c, None)
    status, focus, k, steps, max_h, cyc_step, period = _K.run(focus, k, budget, detect_cycles, stop)
    stats = EvalStats(steps, max_h)
    if status == _K.RETURNED:
        return Returned(focus.value), stats
    if status == _K.STUCK:
        return Stuck(focus.op, focus.arg, 0 if k is None else k.size), stats
    if status == _K.CYCLE:
        return CycleDetected(cyc_step, period), stats
    return BudgetExhausted(steps), stats


def trace(c: T.Computation, budget: int) -> list:
    """The configurations ``c``, its successor, and so on: at most ``budget``
    terms in total."""
    _check_closed(c)
    out = [c]
    focus, k = _K.refocus(c, None)
    while len(out) < budget:
        status, focus, k = _K.reduce(focus, k)
        if status != _K.STEPPED:
            break
        out.append(plug(focus, k))
        focus, k = _K.refocus(focus, k)
    return out
