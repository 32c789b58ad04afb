"""Answer-type-modification (ATM) typing: subtyping derivations, an
annotation-assisted bidirectional checker producing typing derivations, and an
independent validator for both kinds of derivation.

Checking discipline
-------------------
* Synthesis at variables, applications, operation calls and ``return``.
* Checking at lambda bodies, ``if`` branches, handler clauses and
  ascriptions; on a mismatch exactly one subsumption (``T-CSub``/``T-VSub``)
  is attempted.
* ``let`` uses ``T-LetP`` when both parts are pure and no effectful type is
  expected, and ``T-LetIp`` otherwise, embedding a pure part with
  ``S-Embed`` where needed.
* A handler is typed where it is used.  Its clauses must cover exactly the
  operations of the ATM signature, because its translation is a record of
  the signature's record type.
* Records and projections are not part of the source calculus and are
  rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import terms as T
from .types import BOOL, UNIT, Arrow, BaseType, Eff, Fun, Pure, RecordType, Signature, lift


class AtmTypeError(TypeError):
    """``kind`` is one of needs-annotation, rule-mismatch, answer-type-mismatch."""

    def __init__(self, kind: str, message: str, term=None):
        self.kind = kind
        self.term = term
        where = ""
        if term is not None:
            from .printer import print_term

            text = print_term(term)
            where = f" in `{text if len(text) < 120 else text[:117] + '...'}`"
        super().__init__(f"{kind}: {message}{where}")


# -- subtyping ----------------------------------------------------------------


@dataclass(frozen=True)
class SubDeriv:
    """One node of a subtyping derivation.

    Premises by rule: S-Base none; S-Arr (dom: rhs.dom <= lhs.dom,
    cod: lhs.cod <= rhs.cod); S-Pure (ret); S-Ipure (ret, answer-in
    rhs.ans_in <= lhs.ans_in, answer-out lhs.ans_out <= rhs.ans_out);
    S-Embed (ret, rhs.ans_in <= rhs.ans_out).
    """

    rule: str
    lhs: object
    rhs: object
    premises: tuple = ()

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "premises": [p.to_json() for p in self.premises],
        }


def subtype(a, b) -> Optional[SubDeriv]:
    """A derivation of ``a <= b`` if one exists.  The rules are
    syntax-directed on the shapes of both sides."""
    if isinstance(a, BaseType) and isinstance(b, BaseType):
        return SubDeriv("S-Base", a, b) if a == b else None
    if isinstance(a, Fun) and isinstance(b, Fun):
        dom = subtype(b.dom, a.dom)
        if dom is None:
            return None
        cod = subtype(a.cod, b.cod)
        if cod is None:
            return None
        return SubDeriv("S-Arr", a, b, (dom, cod))
    if isinstance(a, Pure) and isinstance(b, Pure):
        ret = subtype(a.ret, b.ret)
        return None if ret is None else SubDeriv("S-Pure", a, b, (ret,))
    if isinstance(a, Pure) and isinstance(b, Eff):
        ret = subtype(a.ret, b.ret)
        if ret is None:
            return None
        ans = subtype(b.ans_in, b.ans_out)
        return None if ans is None else SubDeriv("S-Embed", a, b, (ret, ans))
    if isinstance(a, Eff) and isinstance(b, Eff):
        ret = subtype(a.ret, b.ret)
        if ret is None:
            return None
        ans_in = subtype(b.ans_in, a.ans_in)
        if ans_in is None:
            return None
        ans_out = subtype(a.ans_out, b.ans_out)
        if ans_out is None:
            return None
        return SubDeriv("S-Ipure", a, b, (ret, ans_in, ans_out))
    return None


def refl(t) -> SubDeriv:
    """The structural reflexivity derivation of ``t <= t``."""
    d = subtype(t, t)
    if d is None:
        raise ValueError(f"not an ATM type: {t!r}")
    return d


def compose(d1: SubDeriv, d2: SubDeriv) -> Optional[SubDeriv]:
    """A derivation of ``d1.lhs <= d2.rhs`` given ``d1.rhs == d2.lhs``."""
    if d1.rhs != d2.lhs:
        return None
    return subtype(d1.lhs, d2.rhs)


def validate_sub(d: SubDeriv) -> bool:
    a, b, ps = d.lhs, d.rhs, d.premises
    if not all(isinstance(p, SubDeriv) for p in ps):
        return False
    if d.rule == "S-Base":
        return isinstance(a, BaseType) and a == b and not ps
    if d.rule == "S-Arr":
        return (
            isinstance(a, Fun)
            and isinstance(b, Fun)
            and len(ps) == 2
            and (ps[0].lhs, ps[0].rhs) == (b.dom, a.dom)
            and (ps[1].lhs, ps[1].rhs) == (a.cod, b.cod)
            and all(validate_sub(p) for p in ps)
        )
    if d.rule == "S-Pure":
        return (
            isinstance(a, Pure)
            and isinstance(b, Pure)
            and len(ps) == 1
            and (ps[0].lhs, ps[0].rhs) == (a.ret, b.ret)
            and validate_sub(ps[0])
        )
    if d.rule == "S-Ipure":
        return (
            isinstance(a, Eff)
            and isinstance(b, Eff)
            and len(ps) == 3
            and (ps[0].lhs, ps[0].rhs) == (a.ret, b.ret)
            and (ps[1].lhs, ps[1].rhs) == (b.ans_in, a.ans_in)
            and (ps[2].lhs, ps[2].rhs) == (a.ans_out, b.ans_out)
            and all(validate_sub(p) for p in ps)
        )
    if d.rule == "S-Embed":
        return (
            isinstance(a, Pure)
            and isinstance(b, Eff)
            and len(ps) == 2
            and (ps[0].lhs, ps[0].rhs) == (a.ret, b.ret)
            and (ps[1].lhs, ps[1].rhs) == (b.ans_in, b.ans_out)
            and all(validate_sub(p) for p in ps)
        )
    return False


# -- typing derivations -------------------------------------------------------


@dataclass(eq=False)
class Deriv:
    """One node of a typing derivation.

    ``subject`` is the typed term with ascriptions removed (a ``Handler`` for
    T-Hdlr, whose ``type`` is None).  ``sub`` holds the subtyping derivation
    of a T-VSub/T-CSub node.
    """

    rule: str
    env: dict
    subject: object
    type: object
    premises: tuple = ()
    sub: Optional[SubDeriv] = None

    def to_json(self) -> dict:
        from .printer import print_term

        out = {
            "rule": self.rule,
            "env": {x: str(t) for x, t in sorted(self.env.items())},
            "subject": print_term(self.subject),
            "type": None if self.type is None else str(self.type),
            "premises": [p.to_json() for p in self.premises],
        }
        if self.sub is not None:
            out["sub"] = self.sub.to_json()
        return out

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


def value_type(ann):
    """Read a binder annotation as an ATM value type."""
    if isinstance(ann, (BaseType, Fun)):
        return ann
    if isinstance(ann, Arrow):
        return lift(ann)
    if isinstance(ann, RecordType):
        raise AtmTypeError("rule-mismatch", "record types are not part of the ATM system")
    raise AtmTypeError("rule-mismatch", f"not a value type: {ann}")


def _extend(env: dict, *pairs) -> dict:
    out = dict(env)
    for name, ty in pairs:
        out[name] = ty
    return out


class _Checker:
    def __init__(self, sig: Signature):
        self.sig = sig

    # helpers
    def coerce(self, d: Deriv, target) -> Deriv:
        """``d`` at type ``target``, through one subsumption if needed."""
        if d.type == target:
            return d
        sub = subtype(d.type, target)
        if sub is None:
            kind = "answer-type-mismatch" if _same_shape_ret(d.type, target) else "rule-mismatch"
            raise AtmTypeError(kind, f"{d.type} is not a subtype of {target}", d.subject)
        rule = "T-CSub" if isinstance(target, (Pure, Eff)) else "T-VSub"
        return Deriv(rule, d.env, d.subject, target, (d,), sub)

    # values
    def synth_v(self, env, v) -> Deriv:
        tp = type(v)
        if tp is T.Var:
            if v.name not in env:
                raise AtmTypeError("rule-mismatch", f"unbound variable {v.name}", v)
            return Deriv("T-Var", env, v, env[v.name])
        if tp is T.UnitV:
            return Deriv("T-Unit", env, v, UNIT)
        if tp is T.BoolV:
            return Deriv("T-Bool", env, v, BOOL)
        if tp is T.Lam:
            if v.ann is None:
                raise AtmTypeError("needs-annotation", f"binder {v.var} needs a type", v)
            dom = value_type(v.ann)
            body = self.synth_c(_extend(env, (v.var, dom)), v.body)
            return Deriv("T-Lam", env, _lam(v, body), Fun(dom, body.type), (body,))
        if tp is T.Rec:
            if v.ann is None:
                raise AtmTypeError("needs-annotation", f"recursive binder {v.var} needs a type", v)
            return self.rec(env, v, value_type(v.ann))
        if tp is T.Record:
            raise AtmTypeError("rule-mismatch", "records are not part of the source calculus", v)
        raise AtmTypeError("rule-mismatch", f"not a value: {tp.__name__}", v)

    def rec(self, env, v, tau) -> Deriv:
        body = self.check_v(_extend(env, (v.var, tau)), v.body, tau)
        return Deriv("T-Rec", env, _rec(v, body), tau, (body,))

    def check_v(self, env, v, tau) -> Deriv:
        tp = type(v)
        if tp is T.Lam and isinstance(tau, Fun):
            dom = tau.dom if v.ann is None else value_type(v.ann)
            if dom == tau.dom:
                body = self.check_c(_extend(env, (v.var, dom)), v.body, tau.cod)
                return Deriv("T-Lam", env, _lam(v, body), tau, (body,))
        if tp is T.Rec and v.ann is None:
            return self.rec(env, v, tau)
        return self.coerce(self.synth_v(env, v), tau)

    # computations
    def synth_c(self, env, c) -> Deriv:
        tp = type(c)
        if tp is T.Return:
            vd = self.synth_v(env, c.value)
            return Deriv("T-Ret", env, _same(c, T.Return, vd.subject), Pure(vd.type), (vd,))
        if tp is T.Op:
            sig = self.sig.atm.get(c.op)
            if sig is None:
                raise AtmTypeError("rule-mismatch", f"operation {c.op} has no ATM signature entry", c)
            vd = self.check_v(env, c.arg, sig.arg)
            return Deriv("T-Op", env, _op(c, vd), sig.comp, (vd,))
        if tp is T.App:
            fn = c.fn
            if type(fn) is T.Lam and fn.ann is None:
                ad = self.synth_v(env, c.arg)
                body = self.synth_c(_extend(env, (fn.var, ad.type)), fn.body)
                fd = Deriv("T-Lam", env, _lam(fn, body), Fun(ad.type, body.type), (body,))
            else:
                fd = self.synth_v(env, fn)
                if not isinstance(fd.type, Fun):
                    raise AtmTypeError("rule-mismatch", f"applying a value of type {fd.type}", c)
                ad = self.check_v(env, c.arg, fd.type.dom)
            return Deriv("T-App", env, _same(c, T.App, fd.subject, ad.subject), fd.type.cod, (fd, ad))
        if tp is T.If:
            cd = self.check_v(env, c.cond, BOOL)
            try:
                d1 = self.synth_c(env, c.then)
                d2 = self.check_c(env, c.else_, d1.type)
            except AtmTypeError as first:
                try:
                    d2 = self.synth_c(env, c.else_)
                    d1 = self.check_c(env, c.then, d2.type)
                except AtmTypeError:
                    raise first from None
            return Deriv("T-If", env, _same(c, T.If, cd.subject, d1.subject, d2.subject), d1.type, (cd, d1, d2))
        if tp is T.Let:
            return self.let(env, c, None)
        if tp is T.Handle:
            return self.handle(env, c, None)
        if tp is T.Ascribe:
            return self.check_c(env, c.body, c.type)
        if tp is T.Proj:
            raise AtmTypeError("rule-mismatch", "projections are not part of the source calculus", c)
        raise AtmTypeError("rule-mismatch", f"not a computation: {tp.__name__}", c)

    def check_c(self, env, c, rho) -> Deriv:
        tp = type(c)
        if tp is T.Return and isinstance(rho, Pure):
            vd = self.check_v(env, c.value, rho.ret)
            return Deriv("T-Ret", env, _same(c, T.Return, vd.subject), rho, (vd,))
        if tp is T.If:
            cd = self.check_v(env, c.cond, BOOL)
            d1 = self.check_c(env, c.then, rho)
            d2 = self.check_c(env, c.else_, rho)
            return Deriv("T-If", env, _same(c, T.If, cd.subject, d1.subject, d2.subject), rho, (cd, d1, d2))
        if tp is T.Let:
            return self.let(env, c, rho)
        if tp is T.Handle:
            return self.coerce(self.handle(env, c, rho), rho)
        if tp is T.Ascribe:
            return self.coerce(self.check_c(env, c.body, c.type), rho)
        return self.coerce(self.synth_c(env, c), rho)

    def let(self, env, c: T.Let, expected) -> Deriv:
        d1 = self.synth_c(env, c.bound)
        tau1 = d1.type.ret
        env2 = _extend(env, (c.var, tau1))
        if expected is not None:
            if isinstance(expected, Pure):
                if not isinstance(d1.type, Pure):
                    raise AtmTypeError(
                        "answer-type-mismatch", f"effectful {d1.type} bound where {expected} is expected", c
                    )
                d2 = self.check_c(env2, c.body, expected)
                return Deriv("T-LetP", env, _let(c, d1, d2), expected, (d1, d2))
            # effectful expected type tau / rho2 => rho1'
            rho1_out = expected.ans_out
            if isinstance(d1.type, Pure):
                d1 = self.coerce(d1, Eff(tau1, rho1_out, rho1_out))
            elif d1.type.ans_out != rho1_out:
                d1 = self.coerce(d1, Eff(tau1, d1.type.ans_in, rho1_out))
            d2 = self.check_c(env2, c.body, Eff(expected.ret, expected.ans_in, d1.type.ans_in))
            return Deriv("T-LetIp", env, _let(c, d1, d2), expected, (d1, d2))
        d2 = self.synth_c(env2, c.body)
        t1, t2 = d1.type, d2.type
        if isinstance(t1, Pure) and isinstance(t2, Pure):
            return Deriv("T-LetP", env, _let(c, d1, d2), t2, (d1, d2))
        if isinstance(t1, Pure):
            # embed c1 so that its answer types meet c2's answer-out
            d1 = self.coerce(d1, Eff(tau1, t2.ans_out, t2.ans_out))
        elif isinstance(t2, Pure):
            d2 = self.coerce(d2, Eff(t2.ret, t1.ans_in, t1.ans_in))
        elif t2.ans_out != t1.ans_in:
            d2 = self.coerce(d2, Eff(t2.ret, t2.ans_in, t1.ans_in))
        t1, t2 = d1.type, d2.type
        return Deriv("T-LetIp", env, _let(c, d1, d2), Eff(t2.ret, t2.ans_in, t1.ans_out), (d1, d2))

    def handler(self, env, h: T.Handler) -> Deriv:
        ops = set(self.sig.atm)
        have = set(h.by_op)
        if have != ops:
            missing = sorted(ops - have)
            extra = sorted(have - ops)
            raise AtmTypeError(
                "rule-mismatch",
                f"handler must cover exactly the signature operations (missing {missing}, unknown {extra})",
                T.Return(T.UNIT_V) if h.ret_body is None else h.ret_body,
            )
        premises = []
        for cl in h.clauses:
            sig = self.sig.atm[cl.op]
            cenv = _extend(env, (cl.arg, sig.arg), (cl.cont, Fun(sig.res, sig.ans_in)))
            premises.append(self.check_c(cenv, cl.body, sig.ans_out))
        return Deriv("T-Hdlr", env, h, None, tuple(premises))

    def handle(self, env, c: T.Handle, expected) -> Deriv:
        h = c.handler
        hd = self.handler(env, h)
        bd = self.synth_c(env, c.body)
        tau = bd.type.ret
        renv = _extend(env, (h.ret_var, tau))
        if isinstance(bd.type, Eff):
            rd = self.check_c(renv, h.ret_body, bd.type.ans_in)
        else:
            if expected is None:
                rd = self.synth_c(renv, h.ret_body)
            else:
                rd = self.check_c(renv, h.ret_body, expected)
            bd = self.coerce(bd, Eff(tau, rd.type, rd.type))
        hd.subject = _handler(h, rd, hd.premises)
        return Deriv("T-Han", env, _same(c, T.Handle, hd.subject, bd.subject), bd.type.ans_out, (hd, bd, rd))


def _same_shape_ret(a, b) -> bool:
    return isinstance(a, (Pure, Eff)) and isinstance(b, (Pure, Eff)) and a.ret == b.ret


# Subjects are rebuilt from the premises' subjects, which drops ascriptions in
# one pass and keeps shared subterms shared.


def _same(t, cls, *parts):
    """``t`` if its children are already ``parts``, else a rebuilt node."""
    if all(a is b for a, b in zip(_children(t), parts)):
        return t
    return cls(*parts)


def _children(t):
    tp = type(t)
    if tp is T.Return:
        return (t.value,)
    if tp is T.App:
        return (t.fn, t.arg)
    if tp is T.If:
        return (t.cond, t.then, t.else_)
    if tp is T.Handle:
        return (t.handler, t.body)
    return ()


def _lam(v, body: Deriv):
    return v if v.body is body.subject else T.Lam(v.var, body.subject, v.ann)


def _rec(v, body: Deriv):
    return v if v.body is body.subject else T.Rec(v.var, body.subject, v.ann)


def _op(c, vd: Deriv):
    return c if c.arg is vd.subject else T.Op(c.op, vd.subject)


def _let(c, d1: Deriv, d2: Deriv):
    if c.bound is d1.subject and c.body is d2.subject:
        return c
    return T.Let(c.var, d1.subject, d2.subject)


def _handler(h, rd: Deriv, clause_derivs):
    if rd.subject is h.ret_body and all(cl.body is p.subject for cl, p in zip(h.clauses, clause_derivs)):
        return h
    clauses = [T.OpClause(cl.op, cl.arg, cl.cont, p.subject) for cl, p in zip(h.clauses, clause_derivs)]
    return T.Handler(h.ret_var, rd.subject, clauses)


def check_atm_or_raise(sig: Signature, env: dict, t, expected=None) -> Deriv:
    chk = _Checker(sig)
    env = {x: value_type(ty) for x, ty in env.items()}
    if isinstance(t, T.Value):
        if expected is None:
            return chk.synth_v(env, t)
        return chk.check_v(env, t, expected)
    if expected is None:
        return chk.synth_c(env, t)
    return chk.check_c(env, t, expected)


def check_atm(sig: Signature, env: dict, t, expected=None) -> Optional[Deriv]:
    """A typing derivation for ``t`` (at ``expected`` when given), or None."""
    try:
        return check_atm_or_raise(sig, env, t, expected)
    except AtmTypeError:
        return None


def check_program_atm(sig: Signature, c) -> Optional[Deriv]:
    """A derivation for a closed program; programs must have a pure type."""
    d = check_atm(sig, {}, c)
    if d is None or not isinstance(d.type, Pure):
        return None
    return d


def check_program_atm_or_raise(sig: Signature, c) -> Deriv:
    d = check_atm_or_raise(sig, {}, c)
    if not isinstance(d.type, Pure):
        raise AtmTypeError("answer-type-mismatch", f"a program needs a pure type, found {d.type}", c)
    return d


# -- validation ---------------------------------------------------------------


def validate_derivation(d, sig: Signature | None = None) -> bool:
    """True iff every node is an instance of its rule (types and environments
    matching exactly).  Subtyping derivations are accepted too."""
    if isinstance(d, SubDeriv):
        return validate_sub(d)
    if sig is None:
        sig = Signature()
    try:
        return _valid(d, sig, set())
    except (AttributeError, TypeError, KeyError, IndexError):
        return False


def _valid(d: Deriv, sig: Signature, seen: set) -> bool:
    # shared subderivations are checked once
    if id(d) in seen:
        return True
    ok = _valid_node(d, sig, seen)
    if ok:
        seen.add(id(d))
    return ok


def _valid_node(d: Deriv, sig: Signature, seen: set) -> bool:
    r, env, s, ty, ps = d.rule, d.env, d.subject, d.type, d.premises
    if not all(isinstance(p, Deriv) for p in ps):
        return False

    def same(p, penv, psubject, ptype) -> bool:
        return p.env == penv and p.subject == psubject and p.type == ptype and _valid(p, sig, seen)

    if r == "T-Unit":
        return type(s) is T.UnitV and ty == UNIT and not ps
    if r == "T-Bool":
        return type(s) is T.BoolV and ty == BOOL and not ps
    if r == "T-Var":
        return type(s) is T.Var and env.get(s.name) == ty and s.name in env and not ps
    if r == "T-Lam":
        return (
            type(s) is T.Lam
            and isinstance(ty, Fun)
            and len(ps) == 1
            and same(ps[0], _extend(env, (s.var, ty.dom)), s.body, ty.cod)
        )
    if r == "T-Rec":
        return type(s) is T.Rec and len(ps) == 1 and same(ps[0], _extend(env, (s.var, ty)), s.body, ty)
    if r == "T-If":
        return (
            type(s) is T.If
            and isinstance(ty, (Pure, Eff))
            and len(ps) == 3
            and same(ps[0], env, s.cond, BOOL)
            and same(ps[1], env, s.then, ty)
            and same(ps[2], env, s.else_, ty)
        )
    if r == "T-App":
        if type(s) is not T.App or len(ps) != 2:
            return False
        ft = ps[0].type
        return isinstance(ft, Fun) and ft.cod == ty and same(ps[0], env, s.fn, ft) and same(ps[1], env, s.arg, ft.dom)
    if r == "T-LetP":
        if type(s) is not T.Let or len(ps) != 2 or not isinstance(ty, Pure):
            return False
        t1 = ps[0].type
        return (
            isinstance(t1, Pure)
            and same(ps[0], env, s.bound, t1)
            and same(ps[1], _extend(env, (s.var, t1.ret)), s.body, ty)
        )
    if r == "T-LetIp":
        if type(s) is not T.Let or len(ps) != 2 or not isinstance(ty, Eff):
            return False
        t1, t2 = ps[0].type, ps[1].type
        return (
            isinstance(t1, Eff)
            and isinstance(t2, Eff)
            and t2.ans_out == t1.ans_in
            and ty == Eff(t2.ret, t2.ans_in, t1.ans_out)
            and same(ps[0], env, s.bound, t1)
            and same(ps[1], _extend(env, (s.var, t1.ret)), s.body, t2)
        )
    if r == "T-Ret":
        return (
            type(s) is T.Return
            and isinstance(ty, Pure)
            and len(ps) == 1
            and same(ps[0], env, s.value, ty.ret)
        )
    if r == "T-Op":
        if type(s) is not T.Op or len(ps) != 1 or s.op not in sig.atm:
            return False
        entry = sig.atm[s.op]
        return ty == entry.comp and same(ps[0], env, s.arg, entry.arg)
    if r == "T-Hdlr":
        if type(s) is not T.Handler or ty is not None or len(ps) != len(s.clauses):
            return False
        if set(s.by_op) != set(sig.atm):
            return False
        for cl, p in zip(s.clauses, ps):
            entry = sig.atm[cl.op]
            cenv = _extend(env, (cl.arg, entry.arg), (cl.cont, Fun(entry.res, entry.ans_in)))
            if not same(p, cenv, cl.body, entry.ans_out):
                return False
        return True
    if r == "T-Han":
        if type(s) is not T.Handle or len(ps) != 3:
            return False
        hd, bd, rd = ps
        bt = bd.type
        return (
            hd.rule == "T-Hdlr"
            and hd.env == env
            and hd.subject == s.handler
            and _valid(hd, sig, seen)
            and isinstance(bt, Eff)
            and bt.ans_out == ty
            and same(bd, env, s.body, bt)
            and same(rd, _extend(env, (s.handler.ret_var, bt.ret)), s.handler.ret_body, bt.ans_in)
        )
    if r in ("T-VSub", "T-CSub"):
        if len(ps) != 1 or d.sub is None:
            return False
        p = ps[0]
        is_comp = isinstance(ty, (Pure, Eff))
        if (r == "T-CSub") != is_comp:
            return False
        return (
            d.sub.lhs == p.type
            and d.sub.rhs == ty
            and validate_sub(d.sub)
            and same(p, env, s, p.type)
        )
    return False
