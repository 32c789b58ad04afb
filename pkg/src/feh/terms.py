"""Core abstract syntax of the calculus (values, computations, handlers).

Every node caches its structural hash and its free-variable set at
construction, so hashing a configuration and skipping closed subterms during
substitution are O(1).  Nodes are never mutated after ``__init__``.

Value and computation classes are checked when a node is built; a
computation in a value slot raises ``TypeError``.
"""

from __future__ import annotations

import re

EMPTY = frozenset()


def _union(a: frozenset, b: frozenset) -> frozenset:
    if not a:
        return b
    if not b:
        return a
    return a | b


def _bind(fv: frozenset, name: str) -> frozenset:
    return fv - {name} if name in fv else fv


def _need_value(t, where):
    if not isinstance(t, Value):
        raise TypeError(f"{where} expects a value, got {type(t).__name__}")


def _need_comp(t, where):
    if not isinstance(t, Computation):
        raise TypeError(f"{where} expects a computation, got {type(t).__name__}")


class Term:
    __slots__ = ("fv", "_hash")

    def __hash__(self):
        return self._hash

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        from .printer import print_term

        return f"<{type(self).__name__} {print_term(self)}>"


class Value(Term):
    __slots__ = ()


class Computation(Term):
    __slots__ = ()


# -- values -------------------------------------------------------------------


class Var(Value):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.fv = frozenset((name,))
        self._hash = hash(("var", name))

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)


class UnitV(Value):
    __slots__ = ()

    def __init__(self):
        self.fv = EMPTY
        self._hash = hash("unit")

    def __eq__(self, other):
        return type(other) is UnitV


class BoolV(Value):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = bool(value)
        self.fv = EMPTY
        self._hash = hash(("bool", self.value))

    def __eq__(self, other):
        return type(other) is BoolV and other.value == self.value


UNIT_V = UnitV()
TRUE = BoolV(True)
FALSE = BoolV(False)


def boolv(b: bool) -> BoolV:
    return TRUE if b else FALSE


class Lam(Value):
    """``fun x -> body``; ``ann`` is an optional binder type (simple or ATM)."""

    __slots__ = ("var", "ann", "body")

    def __init__(self, var: str, body: Computation, ann=None):
        _need_comp(body, "lambda body")
        self.var = var
        self.ann = ann
        self.body = body
        self.fv = _bind(body.fv, var)
        self._hash = hash(("lam", var, ann, body._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Lam
            and self._hash == other._hash
            and self.var == other.var
            and self.ann == other.ann
            and self.body == other.body
        )


class Rec(Value):
    """``rec f. body`` with ``body`` a value that may mention ``f``."""

    __slots__ = ("var", "ann", "body")

    def __init__(self, var: str, body: Value, ann=None):
        _need_value(body, "rec body")
        self.var = var
        self.ann = ann
        self.body = body
        self.fv = _bind(body.fv, var)
        self._hash = hash(("rec", var, ann, body._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Rec
            and self._hash == other._hash
            and self.var == other.var
            and self.ann == other.ann
            and self.body == other.body
        )


class Record(Value):
    __slots__ = ("fields",)

    def __init__(self, fields):
        fields = tuple(fields)
        labels = [l for l, _ in fields]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate record label in {labels}")
        fv = EMPTY
        for label, v in fields:
            _need_value(v, f"record field {label}")
            fv = _union(fv, v.fv)
        self.fields = fields
        self.fv = fv
        self._hash = hash(("record",) + tuple((l, v._hash) for l, v in fields))

    def get(self, label):
        for l, v in self.fields:
            if l == label:
                return v
        return None

    def __eq__(self, other):
        return self is other or (
            type(other) is Record and self._hash == other._hash and self.fields == other.fields
        )


# -- computations -------------------------------------------------------------


class Return(Computation):
    __slots__ = ("value",)

    def __init__(self, value: Value):
        _need_value(value, "return")
        self.value = value
        self.fv = value.fv
        self._hash = hash(("ret", value._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Return and self._hash == other._hash and self.value == other.value
        )


class Op(Computation):
    """Operation invocation ``do op arg``."""

    __slots__ = ("op", "arg")

    def __init__(self, op: str, arg: Value):
        _need_value(arg, "operation argument")
        self.op = op
        self.arg = arg
        self.fv = arg.fv
        self._hash = hash(("op", op, arg._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Op
            and self._hash == other._hash
            and self.op == other.op
            and self.arg == other.arg
        )


class App(Computation):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: Value, arg: Value):
        _need_value(fn, "application head")
        _need_value(arg, "application argument")
        self.fn = fn
        self.arg = arg
        self.fv = _union(fn.fv, arg.fv)
        self._hash = hash(("app", fn._hash, arg._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is App
            and self._hash == other._hash
            and self.fn == other.fn
            and self.arg == other.arg
        )


class If(Computation):
    __slots__ = ("cond", "then", "else_")

    def __init__(self, cond: Value, then: Computation, else_: Computation):
        _need_value(cond, "if condition")
        _need_comp(then, "then branch")
        _need_comp(else_, "else branch")
        self.cond = cond
        self.then = then
        self.else_ = else_
        self.fv = _union(cond.fv, _union(then.fv, else_.fv))
        self._hash = hash(("if", cond._hash, then._hash, else_._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is If
            and self._hash == other._hash
            and self.cond == other.cond
            and self.then == other.then
            and self.else_ == other.else_
        )


class Let(Computation):
    __slots__ = ("var", "bound", "body")

    def __init__(self, var: str, bound: Computation, body: Computation):
        _need_comp(bound, "let-bound expression")
        _need_comp(body, "let body")
        self.var = var
        self.bound = bound
        self.body = body
        self.fv = _union(bound.fv, _bind(body.fv, var))
        self._hash = hash(("let", var, bound._hash, body._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Let
            and self._hash == other._hash
            and self.var == other.var
            and self.bound == other.bound
            and self.body == other.body
        )


class Handle(Computation):
    """``with handler handle body``."""

    __slots__ = ("handler", "body")

    def __init__(self, handler: "Handler", body: Computation):
        if not isinstance(handler, Handler):
            raise TypeError("with-handle expects a handler")
        _need_comp(body, "handled computation")
        self.handler = handler
        self.body = body
        self.fv = _union(handler.fv, body.fv)
        self._hash = hash(("handle", handler._hash, body._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Handle
            and self._hash == other._hash
            and self.handler == other.handler
            and self.body == other.body
        )


class Proj(Computation):
    __slots__ = ("record", "label")

    def __init__(self, record: Value, label: str):
        _need_value(record, "projection")
        self.record = record
        self.label = label
        self.fv = record.fv
        self._hash = hash(("proj", record._hash, label))

    def __eq__(self, other):
        return self is other or (
            type(other) is Proj
            and self._hash == other._hash
            and self.label == other.label
            and self.record == other.record
        )


class Ascribe(Computation):
    """Type ascription ``(body : ctype)``; transparent to evaluation."""

    __slots__ = ("body", "type")

    def __init__(self, body: Computation, type):
        _need_comp(body, "ascription")
        self.body = body
        self.type = type
        self.fv = body.fv
        self._hash = hash(("asc", body._hash, type))

    def __eq__(self, other):
        return self is other or (
            type(other) is Ascribe
            and self._hash == other._hash
            and self.type == other.type
            and self.body == other.body
        )


# -- handlers -----------------------------------------------------------------


class OpClause:
    __slots__ = ("op", "arg", "cont", "body", "fv", "_hash")

    def __init__(self, op: str, arg: str, cont: str, body: Computation):
        _need_comp(body, f"clause {op}")
        if arg == cont:
            raise ValueError(f"clause {op} binds {arg} twice")
        self.op = op
        self.arg = arg
        self.cont = cont
        self.body = body
        self.fv = _bind(_bind(body.fv, arg), cont)
        self._hash = hash((op, arg, cont, body._hash))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            type(other) is OpClause
            and self._hash == other._hash
            and (self.op, self.arg, self.cont) == (other.op, other.arg, other.cont)
            and self.body == other.body
        )

    def __repr__(self):
        return f"OpClause({self.op}, {self.arg}, {self.cont}, ...)"


class Handler:
    """Exactly one return clause plus operation clauses with distinct names."""

    __slots__ = ("ret_var", "ret_body", "clauses", "by_op", "fv", "_hash")

    def __init__(self, ret_var: str, ret_body: Computation, clauses=()):
        _need_comp(ret_body, "return clause")
        clauses = tuple(clauses)
        by_op = {}
        for cl in clauses:
            if cl.op in by_op:
                raise ValueError(f"duplicate clause for operation {cl.op}")
            by_op[cl.op] = cl
        fv = _bind(ret_body.fv, ret_var)
        for cl in clauses:
            fv = _union(fv, cl.fv)
        self.ret_var = ret_var
        self.ret_body = ret_body
        self.clauses = clauses
        self.by_op = by_op
        self.fv = fv
        self._hash = hash(("handler", ret_var, ret_body._hash) + tuple(c._hash for c in clauses))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            type(other) is Handler
            and self._hash == other._hash
            and self.ret_var == other.ret_var
            and self.ret_body == other.ret_body
            and self.clauses == other.clauses
        )

    def __repr__(self):
        return f"Handler(return {self.ret_var}, ops={list(self.by_op)})"


# -- names --------------------------------------------------------------------

_TAG = re.compile(r"^(.*?)_(\d+)$")


def base_name(name: str) -> str:
    m = _TAG.match(name)
    return m.group(1) if m and m.group(1) else name


class Fresh:
    """Deterministic fresh-name supply: ``base_N`` with N counting up, never
    returning a name in ``avoid`` or one handed out before."""

    def __init__(self, avoid=()):
        self.used = set(avoid)
        self.counter = 0

    def __call__(self, base: str = "x") -> str:
        base = base_name(base)
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name

    def avoid(self, names):
        self.used.update(names)


def all_names(t, acc=None) -> set:
    """Every variable name (bound or free) occurring in ``t``."""
    if acc is None:
        acc = set()
    seen = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        tp = type(node)
        if tp is Var:
            acc.add(node.name)
        elif tp in (Lam, Rec):
            acc.add(node.var)
            stack.append(node.body)
        elif tp is Record:
            stack.extend(v for _, v in node.fields)
        elif tp is Return:
            stack.append(node.value)
        elif tp is Op:
            stack.append(node.arg)
        elif tp is App:
            stack.extend((node.fn, node.arg))
        elif tp is If:
            stack.extend((node.cond, node.then, node.else_))
        elif tp is Let:
            acc.add(node.var)
            stack.extend((node.bound, node.body))
        elif tp is Handle:
            stack.extend((node.handler, node.body))
        elif tp is Handler:
            acc.add(node.ret_var)
            stack.append(node.ret_body)
            for cl in node.clauses:
                acc.update((cl.arg, cl.cont))
                stack.append(cl.body)
        elif tp is Proj:
            stack.append(node.record)
        elif tp is Ascribe:
            stack.append(node.body)
    return acc


def free_vars(t) -> frozenset:
    return t.fv


# -- substitution -------------------------------------------------------------


def substitute(body, name: str, replacement: Value, fresh: Fresh | None = None):
    """Capture-avoiding ``body[replacement/name]``.

    Binders that would capture a free variable of ``replacement`` are renamed
    with names from ``fresh`` (a supply avoiding every name in sight is made
    when none is given).
    """
    if not isinstance(replacement, Value):
        raise TypeError("substitution replacement must be a value")
    if name not in body.fv:
        return body
    if fresh is None and replacement.fv:
        fresh = Fresh(all_names(body) | all_names(replacement))
    return _Subst(name, replacement, fresh).go(body)


class _Subst:
    def __init__(self, name, repl, fresh):
        self.name = name
        self.repl = repl
        self.rfv = repl.fv
        self.fresh = fresh
        self.memo = {}

    def binder(self, var, body):
        """Return (var', body') for a binder scoping over ``body``; renames if
        ``var`` would capture a free variable of the replacement."""
        if var in self.rfv and self.name in body.fv:
            new = self.fresh(var)
            body = _Subst(var, Var(new), self.fresh).go(body)
            return new, body
        return var, body

    def go(self, t):
        name = self.name
        if name not in t.fv:
            return t
        tp = type(t)
        if tp is Var:
            return self.repl
        if tp is Lam:
            if t.var == name:
                return t
            var, body = self.binder(t.var, t.body)
            return Lam(var, self.go(body), t.ann)
        if tp is Rec:
            key = id(t)
            hit = self.memo.get(key)
            if hit is not None:
                return hit[1]
            if t.var == name:
                return t
            var, body = self.binder(t.var, t.body)
            out = Rec(var, self.go(body), t.ann)
            self.memo[key] = (t, out)
            return out
        if tp is Record:
            return Record(tuple((l, self.go(v)) for l, v in t.fields))
        if tp is Return:
            return Return(self.go(t.value))
        if tp is Op:
            return Op(t.op, self.go(t.arg))
        if tp is App:
            return App(self.go(t.fn), self.go(t.arg))
        if tp is If:
            return If(self.go(t.cond), self.go(t.then), self.go(t.else_))
        if tp is Let:
            bound = self.go(t.bound)
            if t.var == name:
                return Let(t.var, bound, t.body)
            var, body = self.binder(t.var, t.body)
            return Let(var, bound, self.go(body))
        if tp is Handle:
            return Handle(self.go_handler(t.handler), self.go(t.body))
        if tp is Proj:
            return Proj(self.go(t.record), t.label)
        if tp is Ascribe:
            return Ascribe(self.go(t.body), t.type)
        raise TypeError(f"cannot substitute into {tp.__name__}")

    def go_handler(self, h):
        name = self.name
        if name not in h.fv:
            return h
        if h.ret_var == name:
            rv, rb = h.ret_var, h.ret_body
        else:
            rv, rb = self.binder(h.ret_var, h.ret_body)
            rb = self.go(rb)
        clauses = []
        for cl in h.clauses:
            if name in (cl.arg, cl.cont) or name not in cl.body.fv:
                clauses.append(cl)
                continue
            x, body = self.binder(cl.arg, cl.body)
            k, body = self.binder(cl.cont, body)
            clauses.append(OpClause(cl.op, x, k, self.go(body)))
        return Handler(rv, rb, clauses)


# -- alpha equivalence --------------------------------------------------------


def alpha_equivalent(a, b) -> bool:
    """Structural equality up to consistent renaming of bound variables.

    Binder annotations are compared as well.
    """
    return _alpha(a, b, {}, {})


def _alpha(a, b, left: dict, right: dict) -> bool:
    ta = type(a)
    if ta is not type(b):
        return False
    if not left and not right and a is b:
        return True
    if ta is Var:
        la, rb = left.get(a.name), right.get(b.name)
        if la is None and rb is None:
            return a.name == b.name
        return la is not None and la == rb
    if ta in (UnitV, BoolV):
        return a == b
    if ta in (Lam, Rec):
        if a.ann != b.ann:
            return False
        l2, r2 = _extend(left, right, a.var, b.var)
        return _alpha(a.body, b.body, l2, r2)
    if ta is Record:
        if [l for l, _ in a.fields] != [l for l, _ in b.fields]:
            return False
        return all(_alpha(x, y, left, right) for (_, x), (_, y) in zip(a.fields, b.fields))
    if ta is Return:
        return _alpha(a.value, b.value, left, right)
    if ta is Op:
        return a.op == b.op and _alpha(a.arg, b.arg, left, right)
    if ta is App:
        return _alpha(a.fn, b.fn, left, right) and _alpha(a.arg, b.arg, left, right)
    if ta is If:
        return (
            _alpha(a.cond, b.cond, left, right)
            and _alpha(a.then, b.then, left, right)
            and _alpha(a.else_, b.else_, left, right)
        )
    if ta is Let:
        if not _alpha(a.bound, b.bound, left, right):
            return False
        l2, r2 = _extend(left, right, a.var, b.var)
        return _alpha(a.body, b.body, l2, r2)
    if ta is Handle:
        return _alpha_handler(a.handler, b.handler, left, right) and _alpha(
            a.body, b.body, left, right
        )
    if ta is Proj:
        return a.label == b.label and _alpha(a.record, b.record, left, right)
    if ta is Ascribe:
        return a.type == b.type and _alpha(a.body, b.body, left, right)
    raise TypeError(f"unexpected node {ta.__name__}")


_depth_counter = [0]


def _extend(left, right, x, y):
    _depth_counter[0] += 1
    marker = _depth_counter[0]
    l2 = dict(left)
    r2 = dict(right)
    l2[x] = marker
    r2[y] = marker
    return l2, r2


def _alpha_handler(a: Handler, b: Handler, left, right) -> bool:
    l2, r2 = _extend(left, right, a.ret_var, b.ret_var)
    if not _alpha(a.ret_body, b.ret_body, l2, r2):
        return False
    if sorted(a.by_op) != sorted(b.by_op):
        return False
    for op, ca in a.by_op.items():
        cb = b.by_op[op]
        l2, r2 = _extend(left, right, ca.arg, cb.arg)
        l3, r3 = _extend(l2, r2, ca.cont, cb.cont)
        if not _alpha(ca.body, cb.body, l3, r3):
            return False
    return True


# -- alpha normalization ------------------------------------------------------


def alpha_normalize(t):
    """Rename every binder to ``base_N`` with a single left-to-right counter.

    Free variables are kept and never reused as binder names.  The result
    depends only on the alpha-class of ``t``, so normalizing is idempotent.
    """
    fresh = Fresh(t.fv)
    return _norm(t, {}, fresh)


def _norm(t, env, fresh):
    tp = type(t)
    if tp is Var:
        return Var(env.get(t.name, t.name))
    if tp in (UnitV, BoolV):
        return t
    if tp is Lam:
        new = fresh(t.var)
        return Lam(new, _norm(t.body, {**env, t.var: new}, fresh), t.ann)
    if tp is Rec:
        new = fresh(t.var)
        return Rec(new, _norm(t.body, {**env, t.var: new}, fresh), t.ann)
    if tp is Record:
        return Record(tuple((l, _norm(v, env, fresh)) for l, v in t.fields))
    if tp is Return:
        return Return(_norm(t.value, env, fresh))
    if tp is Op:
        return Op(t.op, _norm(t.arg, env, fresh))
    if tp is App:
        return App(_norm(t.fn, env, fresh), _norm(t.arg, env, fresh))
    if tp is If:
        return If(_norm(t.cond, env, fresh), _norm(t.then, env, fresh), _norm(t.else_, env, fresh))
    if tp is Let:
        bound = _norm(t.bound, env, fresh)
        new = fresh(t.var)
        return Let(new, bound, _norm(t.body, {**env, t.var: new}, fresh))
    if tp is Handle:
        h = t.handler
        rv = fresh(h.ret_var)
        rb = _norm(h.ret_body, {**env, h.ret_var: rv}, fresh)
        clauses = []
        for cl in h.clauses:
            x, k = fresh(cl.arg), fresh(cl.cont)
            body = _norm(cl.body, {**env, cl.arg: x, cl.cont: k}, fresh)
            clauses.append(OpClause(cl.op, x, k, body))
        return Handle(Handler(rv, rb, clauses), _norm(t.body, env, fresh))
    if tp is Proj:
        return Proj(_norm(t.record, env, fresh), t.label)
    if tp is Ascribe:
        return Ascribe(_norm(t.body, env, fresh), t.type)
    raise TypeError(f"unexpected node {tp.__name__}")


def erase_ascriptions(t):
    """Drop every ``Ascribe`` node."""
    tp = type(t)
    if tp is Ascribe:
        return erase_ascriptions(t.body)
    if tp in (Var, UnitV, BoolV):
        return t
    if tp is Lam:
        return Lam(t.var, erase_ascriptions(t.body), t.ann)
    if tp is Rec:
        return Rec(t.var, erase_ascriptions(t.body), t.ann)
    if tp is Record:
        return Record(tuple((l, erase_ascriptions(v)) for l, v in t.fields))
    if tp is Return:
        return Return(erase_ascriptions(t.value))
    if tp is Op:
        return Op(t.op, erase_ascriptions(t.arg))
    if tp is App:
        return App(erase_ascriptions(t.fn), erase_ascriptions(t.arg))
    if tp is If:
        return If(erase_ascriptions(t.cond), erase_ascriptions(t.then), erase_ascriptions(t.else_))
    if tp is Let:
        return Let(t.var, erase_ascriptions(t.bound), erase_ascriptions(t.body))
    if tp is Handle:
        h = t.handler
        clauses = [OpClause(c.op, c.arg, c.cont, erase_ascriptions(c.body)) for c in h.clauses]
        return Handle(Handler(h.ret_var, erase_ascriptions(h.ret_body), clauses), erase_ascriptions(t.body))
    if tp is Proj:
        return Proj(erase_ascriptions(t.record), t.label)
    raise TypeError(f"unexpected node {tp.__name__}")


def contains(t, kinds) -> bool:
    """Whether any node of ``t`` (handlers included) is an instance of ``kinds``."""
    seen = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, kinds):
            return True
        tp = type(node)
        if tp in (Lam, Rec):
            stack.append(node.body)
        elif tp is Record:
            stack.extend(v for _, v in node.fields)
        elif tp is Return:
            stack.append(node.value)
        elif tp is Op:
            stack.append(node.arg)
        elif tp is App:
            stack.extend((node.fn, node.arg))
        elif tp is If:
            stack.extend((node.cond, node.then, node.else_))
        elif tp is Let:
            stack.extend((node.bound, node.body))
        elif tp is Handle:
            stack.extend((node.handler, node.body))
        elif tp is Handler:
            stack.append(node.ret_body)
            stack.extend(cl.body for cl in node.clauses)
        elif tp is Proj:
            stack.append(node.record)
        elif tp is Ascribe:
            stack.append(node.body)
    return False
