"""Hot loop of the small-step evaluator.

A configuration is a focus computation plus a persistent stack of frames
(``let x = [] in c`` or ``with h handle []``).  Pushing frames while searching
for the redex is not a reduction step; every call to ``reduce`` performs
exactly one rule of the operational semantics.

This file is also compiled by Cython (``_ckernel.pyx`` includes it verbatim);
``feh.evaluator`` picks the compiled build when it is importable.
"""

from feh.errors import DynamicTypeError
from feh.terms import (
    App,
    Ascribe,
    BoolV,
    Handle,
    If,
    Lam,
    Let,
    Op,
    Proj,
    Rec,
    Record,
    Return,
    Var,
    substitute,
)

LET = 0
HANDLE = 1

# status codes returned by ``reduce`` and ``run``
STEPPED = 0
RETURNED = 1
STUCK = 2
CYCLE = 3
BUDGET = 4

CONT_VAR = "y"


class Cell:
    """One frame of the evaluation stack, linked to the frames below it."""

    __slots__ = ("kind", "a", "b", "next", "hash", "nh", "size")

    def __init__(self, kind, a, b, next):
        self.kind = kind
        self.a = a  # let: binder name; handle: handler
        self.b = b  # let: body; handle: None
        self.next = next
        if next is None:
            below_hash, below_nh, below_size = 0, 0, 0
        else:
            below_hash, below_nh, below_size = next.hash, next.nh, next.size
        if kind == LET:
            self.hash = hash((LET, a, b._hash, below_hash))
            self.nh = below_nh
        else:
            self.hash = hash((HANDLE, a._hash, below_hash))
            self.nh = below_nh + 1
        self.size = below_size + 1

    def __hash__(self):
        return self.hash

    def __eq__(self, other):
        a = self
        b = other
        while True:
            if a is b:
                return True
            if a is None or b is None:
                return False
            if a.hash != b.hash or a.kind != b.kind or a.size != b.size:
                return False
            if a.kind == LET:
                if a.a != b.a or not (a.b == b.b):
                    return False
            elif not (a.a == b.a):
                return False
            a = a.next
            b = b.next


def stack_eq(a, b):
    if a is None or b is None:
        return a is b
    return a == b


def refocus(c, k):
    """Descend through ``let``/``with``/ascription to the next redex."""
    while True:
        tp = type(c)
        if tp is Let:
            k = Cell(LET, c.var, c.body, k)
            c = c.bound
        elif tp is Handle:
            k = Cell(HANDLE, c.handler, None, k)
            c = c.body
        elif tp is Ascribe:
            c = c.body
        else:
            return c, k


def reduce(c, k):
    """Perform one step on a refocused configuration.

    Returns ``(status, c, k)``.  With ``STEPPED`` the pair is the successor;
    with ``RETURNED`` ``c`` is the final ``return v``; with ``STUCK`` nothing
    changed.
    """
    tp = type(c)
    if tp is Return:
        if k is None:
            return RETURNED, c, k
        if k.kind == LET:
            return STEPPED, substitute(k.b, k.a, c.value), k.next
        h = k.a
        return STEPPED, substitute(h.ret_body, h.ret_var, c.value), k.next
    if tp is App:
        fn = c.fn
        ft = type(fn)
        if ft is Lam:
            return STEPPED, substitute(fn.body, fn.var, c.arg), k
        if ft is Rec:
            return STEPPED, App(substitute(fn.body, fn.var, fn), c.arg), k
        raise DynamicTypeError(f"cannot apply a {ft.__name__} value")
    if tp is If:
        cond = c.cond
        if type(cond) is not BoolV:
            raise DynamicTypeError(f"if-condition is a {type(cond).__name__} value")
        return STEPPED, (c.then if cond.value else c.else_), k
    if tp is Op:
        lets = []
        cell = k
        while cell is not None and cell.kind == LET:
            lets.append(cell)
            cell = cell.next
        if cell is None:
            return STUCK, c, k
        h = cell.a
        clause = h.by_op.get(c.op)
        if clause is None:
            return STUCK, c, k
        inner = Return(Var(CONT_VAR))
        for frame in lets:
            inner = Let(frame.a, inner, frame.b)
        cont = Lam(CONT_VAR, Handle(h, inner))
        body = substitute(clause.body, clause.arg, c.arg)
        body = substitute(body, clause.cont, cont)
        return STEPPED, body, cell.next
    if tp is Proj:
        rec = c.record
        if type(rec) is not Record:
            raise DynamicTypeError(f"projection from a {type(rec).__name__} value")
        v = rec.get(c.label)
        if v is None:
            raise DynamicTypeError(f"record has no label {c.label}")
        return STEPPED, Return(v), k
    raise DynamicTypeError(f"no rule applies to a {tp.__name__} node")


def run(c, k, budget, detect_cycles, stop=None):
    """Iterate ``reduce`` from a refocused configuration.

    Returns ``(status, c, k, steps, max_handlers, cycle_step, period)``.
    Cycle detection uses Brent's algorithm on exact configuration equality,
    so it needs constant memory and never reports a false cycle.  When
    ``stop`` (an object with ``is_set``) becomes set, the run ends early
    with status BUDGET; it is polled every 4096 steps.
    """
    steps = 0
    max_h = 0
    power = 1
    lam = 1
    tort_c = c
    tort_k = k
    tort_hash = hash((c._hash, 0 if k is None else k.hash))
    while True:
        c, k = refocus(c, k)
        if steps > 0 and detect_cycles:
            h = hash((c._hash, 0 if k is None else k.hash))
            if h == tort_hash and c == tort_c and stack_eq(k, tort_k):
                return CYCLE, c, k, steps, max_h, steps, lam
            if lam == power:
                tort_c = c
                tort_k = k
                tort_hash = h
                power *= 2
                lam = 0
            lam += 1
        if k is not None and k.nh > max_h:
            max_h = k.nh
        if stop is not None and steps & 4095 == 0 and steps > 0 and stop.is_set():
            return BUDGET, c, k, steps, max_h, 0, 0
        if steps >= budget:
            tp = type(c)
            if tp is Return and k is None:
                return RETURNED, c, k, steps, max_h, 0, 0
            status, _, _ = reduce(c, k) if tp is Op else (STEPPED, c, k)
            if status == STUCK:
                return STUCK, c, k, steps, max_h, 0, 0
            return BUDGET, c, k, steps, max_h, 0, 0
        status, c2, k2 = reduce(c, k)
        if status != STEPPED:
            return status, c, k, steps, max_h, 0, 0
        c = c2
        k = k2
        steps += 1
