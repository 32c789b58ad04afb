"""Surface syntax tree and its expansion into core terms.

The surface tree mirrors the concrete grammar and keeps every convenience
form: computations in value positions, values in computation positions,
``c1; c2``, multi-argument application and ``mrec``.  ``expand_sugar`` turns
it into core terms:

* a computation ``c`` used where a value is required becomes
  ``let w = c in ... w ...`` (function position is bound before argument
  position, so ``x y z`` is ``let w = x y in w z``);
* a value ``v`` used as a computation becomes ``return v``;
* ``c1; c2`` becomes ``let u = c1 in c2`` with ``u`` fresh;
* ``mrec f0 = v0 and ... and fn = vn in c`` follows the inductive definition:
  ``let fj = rec fj. (mrec <others> in vj) in ...``.  The inner ``mrec`` sits
  in value position, so it is read as the value ``vj`` with every other
  ``fi`` replaced by its own recursive unfolding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import terms as T


class SurfaceError(ValueError):
    pass


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SUnit:
    pass


@dataclass(frozen=True)
class SBool:
    value: bool


@dataclass(frozen=True)
class SLam:
    var: str
    ann: object
    body: object


@dataclass(frozen=True)
class SRec:
    var: str
    ann: object
    body: object


@dataclass(frozen=True)
class SRecord:
    fields: tuple  # ((label, term), ...)


@dataclass(frozen=True)
class SClause:
    op: str
    arg: str
    cont: str
    body: object


@dataclass(frozen=True)
class SHandler:
    ret_var: str
    ret_body: object
    clauses: tuple  # (SClause, ...)


@dataclass(frozen=True)
class SReturn:
    value: object


@dataclass(frozen=True)
class SDo:
    op: str
    arg: object


@dataclass(frozen=True)
class SApp:
    fn: object
    arg: object


@dataclass(frozen=True)
class SIf:
    cond: object
    then: object
    else_: object


@dataclass(frozen=True)
class SLet:
    var: str
    bound: object
    body: object


@dataclass(frozen=True)
class SWith:
    handler: object  # SHandler, or a name bound by a definition
    body: object


@dataclass(frozen=True)
class SProj:
    record: object
    label: str


@dataclass(frozen=True)
class SAscribe:
    body: object
    type: object


@dataclass(frozen=True)
class SSeq:
    first: object
    second: object


@dataclass(frozen=True)
class SMRec:
    bindings: tuple  # ((name, ann, value-term), ...)
    body: object


VALUE_FORMS = (SVar, SUnit, SBool, SLam, SRec)


def is_value_form(s) -> bool:
    if isinstance(s, VALUE_FORMS):
        return True
    if isinstance(s, SRecord):
        return all(is_value_form(v) for _, v in s.fields)
    return False


# -- generic traversal helpers ------------------------------------------------


def surface_names(s, acc=None) -> set:
    """All identifiers (binders and occurrences) in a surface tree."""
    if acc is None:
        acc = set()
    stack = [s]
    while stack:
        n = stack.pop()
        if isinstance(n, SVar):
            acc.add(n.name)
        elif isinstance(n, (SLam, SRec)):
            acc.add(n.var)
            stack.append(n.body)
        elif isinstance(n, SRecord):
            stack.extend(v for _, v in n.fields)
        elif isinstance(n, SHandler):
            acc.add(n.ret_var)
            stack.append(n.ret_body)
            for c in n.clauses:
                acc.update((c.arg, c.cont))
                stack.append(c.body)
        elif isinstance(n, (SReturn,)):
            stack.append(n.value)
        elif isinstance(n, SDo):
            stack.append(n.arg)
        elif isinstance(n, SApp):
            stack.extend((n.fn, n.arg))
        elif isinstance(n, SIf):
            stack.extend((n.cond, n.then, n.else_))
        elif isinstance(n, SLet):
            acc.add(n.var)
            stack.extend((n.bound, n.body))
        elif isinstance(n, SWith):
            stack.extend((n.handler, n.body))
        elif isinstance(n, SProj):
            stack.append(n.record)
        elif isinstance(n, SAscribe):
            stack.append(n.body)
        elif isinstance(n, SSeq):
            stack.extend((n.first, n.second))
        elif isinstance(n, SMRec):
            for name, _, v in n.bindings:
                acc.add(name)
                stack.append(v)
            stack.append(n.body)
    return acc


def surface_ops(s) -> set:
    """Names of all operations invoked (``do op``) or handled in ``s``."""
    out = set()
    stack = [s]
    while stack:
        n = stack.pop()
        if isinstance(n, SDo):
            out.add(n.op)
        if isinstance(n, SHandler):
            out.update(c.op for c in n.clauses)
        for child in _children(n):
            stack.append(child)
    return out


def _children(n):
    if isinstance(n, (SLam, SRec)):
        return (n.body,)
    if isinstance(n, SRecord):
        return tuple(v for _, v in n.fields)
    if isinstance(n, SHandler):
        return (n.ret_body,) + tuple(c.body for c in n.clauses)
    if isinstance(n, SReturn):
        return (n.value,)
    if isinstance(n, SDo):
        return (n.arg,)
    if isinstance(n, SApp):
        return (n.fn, n.arg)
    if isinstance(n, SIf):
        return (n.cond, n.then, n.else_)
    if isinstance(n, SLet):
        return (n.bound, n.body)
    if isinstance(n, SWith):
        return (n.handler, n.body)
    if isinstance(n, SProj):
        return (n.record,)
    if isinstance(n, SAscribe):
        return (n.body,)
    if isinstance(n, SSeq):
        return (n.first, n.second)
    if isinstance(n, SMRec):
        return tuple(v for _, _, v in n.bindings) + (n.body,)
    return ()


def inline_definitions(s, defs: dict):
    """Replace free occurrences of definition names by their (closed) bodies."""
    if not defs:
        return s
    return _inline(s, defs, frozenset())


def _inline(n, defs, bound):
    r = lambda m, b=bound: _inline(m, defs, b)  # noqa: E731
    if isinstance(n, SVar):
        if n.name in defs and n.name not in bound:
            return defs[n.name]
        return n
    if isinstance(n, (SUnit, SBool)):
        return n
    if isinstance(n, SLam):
        return SLam(n.var, n.ann, r(n.body, bound | {n.var}))
    if isinstance(n, SRec):
        return SRec(n.var, n.ann, r(n.body, bound | {n.var}))
    if isinstance(n, SRecord):
        return SRecord(tuple((l, r(v)) for l, v in n.fields))
    if isinstance(n, SHandler):
        return SHandler(
            n.ret_var,
            r(n.ret_body, bound | {n.ret_var}),
            tuple(SClause(c.op, c.arg, c.cont, r(c.body, bound | {c.arg, c.cont})) for c in n.clauses),
        )
    if isinstance(n, SReturn):
        return SReturn(r(n.value))
    if isinstance(n, SDo):
        return SDo(n.op, r(n.arg))
    if isinstance(n, SApp):
        return SApp(r(n.fn), r(n.arg))
    if isinstance(n, SIf):
        return SIf(r(n.cond), r(n.then), r(n.else_))
    if isinstance(n, SLet):
        return SLet(n.var, r(n.bound), r(n.body, bound | {n.var}))
    if isinstance(n, SWith):
        return SWith(r(n.handler), r(n.body))
    if isinstance(n, SProj):
        return SProj(r(n.record), n.label)
    if isinstance(n, SAscribe):
        return SAscribe(r(n.body), n.type)
    if isinstance(n, SSeq):
        return SSeq(r(n.first), r(n.second))
    if isinstance(n, SMRec):
        inner = bound | {name for name, _, _ in n.bindings}
        return SMRec(tuple((name, ann, r(v, inner)) for name, ann, v in n.bindings), r(n.body, inner))
    raise SurfaceError(f"unexpected surface node {type(n).__name__}")


# -- expansion ----------------------------------------------------------------


class _Expander:
    def __init__(self, fresh: T.Fresh):
        self.fresh = fresh

    def value(self, s) -> Optional[T.Value]:
        """Core value for a value-class surface node, else None."""
        if isinstance(s, SVar):
            return T.Var(s.name)
        if isinstance(s, SUnit):
            return T.UNIT_V
        if isinstance(s, SBool):
            return T.boolv(s.value)
        if isinstance(s, SLam):
            return T.Lam(s.var, self.comp(s.body), s.ann)
        if isinstance(s, SRec):
            body = self.value(s.body)
            if body is None:
                raise SurfaceError("the body of rec must be a value")
            return T.Rec(s.var, body, s.ann)
        if isinstance(s, SRecord) and is_value_form(s):
            return T.Record(tuple((l, self.value(v)) for l, v in s.fields))
        return None

    def with_value(self, s, k, base="w"):
        v = self.value(s)
        if v is not None:
            return k(v)
        name = self.fresh(base)
        return T.Let(name, self.comp(s), k(T.Var(name)))

    def with_values(self, items, k, base="w"):
        """Bind several subterms left to right, then call ``k`` on the list."""
        done = []

        def go(i):
            if i == len(items):
                return k(done)
            return self.with_value(items[i], lambda v: (done.append(v), go(i + 1))[1], base)

        return go(0)

    def comp(self, s) -> T.Computation:
        v = self.value(s)
        if v is not None:
            return T.Return(v)
        if isinstance(s, SRecord):
            labels = [l for l, _ in s.fields]
            return self.with_values(
                [x for _, x in s.fields], lambda vs: T.Return(T.Record(tuple(zip(labels, vs))))
            )
        if isinstance(s, SReturn):
            return self.with_value(s.value, T.Return)
        if isinstance(s, SDo):
            return self.with_value(s.arg, lambda a: T.Op(s.op, a))
        if isinstance(s, SApp):
            return self.with_value(s.fn, lambda f: self.with_value(s.arg, lambda a: T.App(f, a)))
        if isinstance(s, SIf):
            return self.with_value(s.cond, lambda c: T.If(c, self.comp(s.then), self.comp(s.else_)))
        if isinstance(s, SLet):
            return T.Let(s.var, self.comp(s.bound), self.comp(s.body))
        if isinstance(s, SWith):
            return T.Handle(self.handler(s.handler), self.comp(s.body))
        if isinstance(s, SProj):
            return self.with_value(s.record, lambda r: T.Proj(r, s.label))
        if isinstance(s, SAscribe):
            return T.Ascribe(self.comp(s.body), s.type)
        if isinstance(s, SSeq):
            return T.Let(self.fresh("u"), self.comp(s.first), self.comp(s.second))
        if isinstance(s, SMRec):
            return self.mrec(s)
        if isinstance(s, SHandler):
            raise SurfaceError("a handler can only appear after 'with'")
        raise SurfaceError(f"unexpected surface node {type(s).__name__}")

    def handler(self, s) -> T.Handler:
        if not isinstance(s, SHandler):
            raise SurfaceError("expected a handler literal after 'with'")
        clauses = [T.OpClause(c.op, c.arg, c.cont, self.comp(c.body)) for c in s.clauses]
        return T.Handler(s.ret_var, self.comp(s.ret_body), clauses)

    def mrec(self, s: SMRec) -> T.Computation:
        names = [name for name, _, _ in s.bindings]
        if len(set(names)) != len(names):
            raise SurfaceError(f"duplicate name in mrec: {names}")
        anns = {name: ann for name, ann, _ in s.bindings}
        bodies = {}
        for name, _, v in s.bindings:
            core = self.value(v)
            if core is None:
                raise SurfaceError(f"mrec binding {name} must be a value")
            bodies[name] = core
        memo = {}

        def unfold(group: frozenset, name: str) -> T.Rec:
            key = (group, name)
            hit = memo.get(key)
            if hit is not None:
                return hit
            body = bodies[name]
            for other in names:
                if other in group and other != name:
                    body = T.substitute(body, other, unfold(group - {name}, other), self.fresh)
            out = T.Rec(name, body, anns[name])
            memo[key] = out
            return out

        everything = frozenset(names)
        result = self.comp(s.body)
        for name in reversed(names):
            result = T.Let(name, T.Return(unfold(everything, name)), result)
        return result


def expand_sugar(s, fresh: T.Fresh | None = None) -> T.Computation:
    """Expand a surface computation into a core computation.

    ``fresh`` defaults to a supply avoiding every identifier in ``s``, so the
    output is reproducible run to run.
    """
    if fresh is None:
        fresh = T.Fresh(surface_names(s))
    return _Expander(fresh).comp(s)


def expand_value(s, fresh: T.Fresh | None = None) -> T.Value:
    if fresh is None:
        fresh = T.Fresh(surface_names(s))
    v = _Expander(fresh).value(s)
    if v is None:
        raise SurfaceError("expected a value")
    return v


# -- core to surface ----------------------------------------------------------


def to_surface(t):
    """Embed a core term (or handler) into the surface tree without sugar."""
    tp = type(t)
    if tp is T.Var:
        return SVar(t.name)
    if tp is T.UnitV:
        return SUnit()
    if tp is T.BoolV:
        return SBool(t.value)
    if tp is T.Lam:
        return SLam(t.var, t.ann, to_surface(t.body))
    if tp is T.Rec:
        return SRec(t.var, t.ann, to_surface(t.body))
    if tp is T.Record:
        return SRecord(tuple((l, to_surface(v)) for l, v in t.fields))
    if tp is T.Return:
        return SReturn(to_surface(t.value))
    if tp is T.Op:
        return SDo(t.op, to_surface(t.arg))
    if tp is T.App:
        return SApp(to_surface(t.fn), to_surface(t.arg))
    if tp is T.If:
        return SIf(to_surface(t.cond), to_surface(t.then), to_surface(t.else_))
    if tp is T.Let:
        return SLet(t.var, to_surface(t.bound), to_surface(t.body))
    if tp is T.Handle:
        return SWith(to_surface(t.handler), to_surface(t.body))
    if tp is T.Handler:
        return SHandler(
            t.ret_var,
            to_surface(t.ret_body),
            tuple(SClause(c.op, c.arg, c.cont, to_surface(c.body)) for c in t.clauses),
        )
    if tp is T.Proj:
        return SProj(to_surface(t.record), t.label)
    if tp is T.Ascribe:
        return SAscribe(to_surface(t.body), t.type)
    raise TypeError(f"not a core term: {t!r}")
