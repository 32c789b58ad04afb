"""CPS transformation directed by ATM typing derivations.

The target is the handler-free fragment extended with records.  Effectful
computations become ``fun h -> fun k -> ...`` where ``h`` is the record of
operation clauses and ``k`` the continuation; pure computations stay direct.
Every static application is reduced while transforming, as long as its head
is a syntactic lambda; other heads give residual run-time applications.

Every binder the transformation emits is annotated with its simple type, so
targets can be checked by ``check_st`` without inference.
"""

from __future__ import annotations

from . import terms as T
from .atm import Deriv, SubDeriv, validate_derivation, validate_sub
from .types import BaseType, Arrow, Eff, Fun, Pure, RecordType, Signature


class CpsError(ValueError):
    pass


# -- types --------------------------------------------------------------------


def _effect_free(t) -> bool:
    if isinstance(t, BaseType):
        return True
    if isinstance(t, Fun):
        return _effect_free(t.dom) and _effect_free(t.cod)
    if isinstance(t, Pure):
        return _effect_free(t.ret)
    return False


def check_signature(sig: Signature) -> None:
    """Raise unless every ATM operation type is free of effectful types.

    An effectful type inside an operation type would make the record type of
    the signature refer to itself, which no simple type can express.
    """
    for op, entry in sig.atm.items():
        for part in (entry.arg, entry.res, entry.ans_in, entry.ans_out):
            if not _effect_free(part):
                raise CpsError(
                    f"operation {op}: effectful types inside operation types make the "
                    "handler record type recursive"
                )


def cps_type(x, sig: Signature | None = None):
    """The simple type of the CPS image of an ATM type, or the record type of
    a signature when ``x`` is a ``Signature``."""
    if isinstance(x, Signature):
        return _sig_type(x)
    if isinstance(x, BaseType):
        return x
    if isinstance(x, Fun):
        return Arrow(cps_type(x.dom, sig), cps_type(x.cod, sig))
    if isinstance(x, Pure):
        return cps_type(x.ret, sig)
    if isinstance(x, Eff):
        if sig is None:
            raise CpsError("an effectful type needs the signature")
        return Arrow(
            _sig_type(sig),
            Arrow(Arrow(cps_type(x.ret, sig), cps_type(x.ans_in, sig)), cps_type(x.ans_out, sig)),
        )
    raise CpsError(f"not an ATM type: {x!r}")


def _sig_type(sig: Signature) -> RecordType:
    check_signature(sig)
    fields = []
    for op, e in sig.atm.items():
        fields.append(
            (op, Arrow(cps_type(e.arg), Arrow(Arrow(cps_type(e.res), cps_type(e.ans_in)), cps_type(e.ans_out))))
        )
    return RecordType(tuple(fields))


def cps_env(env: dict, sig: Signature | None = None) -> dict:
    return {x: cps_type(t, sig) for x, t in env.items()}


# -- target construction ------------------------------------------------------


def as_comp(e) -> T.Computation:
    return T.Return(e) if isinstance(e, T.Value) else e


def _as_value(e):
    if isinstance(e, T.Value):
        return e
    if type(e) is T.Return:
        return e.value
    return None


def _bind(e, fresh: T.Fresh, base: str, body_of):
    """``body_of(v)`` where ``v`` is the value of ``e``; a computation is
    bound to a fresh variable first."""
    v = _as_value(e)
    if v is not None:
        return body_of(v)
    name = fresh(base)
    return T.Let(name, e, body_of(T.Var(name)))


def dynamic_apply(f, a, fresh: T.Fresh) -> T.Computation:
    """The run-time application ``f a``; computation parts are evaluated
    first, function before argument."""
    return _bind(f, fresh, "f", lambda fv: _bind(a, fresh, "a", lambda av: T.App(fv, av)))


def static_apply(f, a, fresh: T.Fresh | None = None):
    """``f @ a``: beta-reduced now when ``f`` is a syntactic lambda,
    otherwise left as a run-time application."""
    if fresh is None:
        fresh = T.Fresh(T.all_names(f) | T.all_names(a))
    fl = _as_value(f)
    if type(fl) is T.Lam:
        body = fl.body
        if type(body) is T.Return and type(body.value) is T.Var and body.value.name == fl.var:
            return a  # identity: (fun x -> return x) @ a
        av = _as_value(a)
        if av is not None:
            return T.substitute(body, fl.var, av, fresh)
        return T.Let(fl.var, a, body)
    if type(f) is T.Let:
        var, body = f.var, f.body
        if var in a.fv:
            new = fresh(var)
            body = T.substitute(body, var, T.Var(new), fresh)
            var = new
        return T.Let(var, f.bound, as_comp(static_apply(body, a, fresh)))
    return dynamic_apply(f, a, fresh)


def _lam(x: str, ann, body) -> T.Lam:
    return T.Lam(x, as_comp(body), ann)


# -- subtyping coercions ------------------------------------------------------


class _Cps:
    def __init__(self, sig: Signature, fresh: T.Fresh):
        self.sig = sig
        self.fresh = fresh
        self.memo = {}

    def ty(self, t):
        return cps_type(t, self.sig)

    def sub(self, d: SubDeriv):
        fresh = self.fresh
        a, b = d.lhs, d.rhs
        r = d.rule
        if r == "S-Base":
            x = fresh("x")
            return _lam(x, a, T.Var(x))
        if r == "S-Arr":
            dom, cod = d.premises
            f, x = fresh("f"), fresh("x")
            arg = static_apply(self.sub(dom), T.Var(x), fresh)
            call = static_apply(T.Var(f), arg, fresh)
            return _lam(f, self.ty(a), _lam(x, self.ty(b.dom), static_apply(self.sub(cod), call, fresh)))
        if r == "S-Pure":
            (ret,) = d.premises
            x = fresh("x")
            return _lam(x, self.ty(a), static_apply(self.sub(ret), T.Var(x), fresh))
        if r == "S-Ipure":
            ret, ans_in, ans_out = d.premises
            x, h, k, y = fresh("x"), fresh("h"), fresh("k"), fresh("y")
            inner = static_apply(self.sub(ans_in), static_apply(T.Var(k), static_apply(self.sub(ret), T.Var(y), fresh), fresh), fresh)
            cont = _lam(y, self.ty(a.ret), inner)
            run = static_apply(static_apply(T.Var(x), T.Var(h), fresh), cont, fresh)
            body = static_apply(self.sub(ans_out), run, fresh)
            return _lam(
                x,
                self.ty(a),
                _lam(h, self.ty_sig(), _lam(k, Arrow(self.ty(b.ret), self.ty(b.ans_in)), body)),
            )
        if r == "S-Embed":
            ret, ans = d.premises
            x, h, k = fresh("x"), fresh("h"), fresh("k")
            body = static_apply(self.sub(ans), static_apply(T.Var(k), static_apply(self.sub(ret), T.Var(x), fresh), fresh), fresh)
            return _lam(
                x,
                self.ty(a),
                _lam(h, self.ty_sig(), _lam(k, Arrow(self.ty(b.ret), self.ty(b.ans_in)), body)),
            )
        raise CpsError(f"unknown subtyping rule {r}")

    def ty_sig(self):
        return _sig_type(self.sig)

    # typing derivations
    def term(self, d: Deriv):
        hit = self.memo.get(id(d))
        if hit is not None:
            return hit[1]
        out = self._term(d)
        self.memo[id(d)] = (d, out)
        return out

    def _term(self, d: Deriv):
        r, s, ps = d.rule, d.subject, d.premises
        fresh = self.fresh
        if r in ("T-Unit", "T-Bool", "T-Var"):
            return s
        if r == "T-Lam":
            return _lam(s.var, self.ty(d.type.dom), self.term(ps[0]))
        if r == "T-Rec":
            body = _as_value(self.term(ps[0]))
            return T.Rec(s.var, body, self.ty(d.type))
        if r == "T-If":
            cond = _as_value(self.term(ps[0]))
            return T.If(cond, as_comp(self.term(ps[1])), as_comp(self.term(ps[2])))
        if r == "T-App":
            return dynamic_apply(self.term(ps[0]), self.term(ps[1]), fresh)
        if r == "T-LetP":
            return T.Let(s.var, as_comp(self.term(ps[0])), as_comp(self.term(ps[1])))
        if r == "T-LetIp":
            d1, d2 = ps
            h, k = fresh("h"), fresh("k")
            c2 = static_apply(static_apply(self.term(d2), T.Var(h), fresh), T.Var(k), fresh)
            cont = _lam(s.var, self.ty(d1.type.ret), c2)
            body = static_apply(static_apply(self.term(d1), T.Var(h), fresh), cont, fresh)
            t = d.type
            return _lam(h, self.ty_sig(), _lam(k, Arrow(self.ty(t.ret), self.ty(t.ans_in)), body))
        if r == "T-Ret":
            return self.term(ps[0])
        if r == "T-Op":
            h, k, p, q = fresh("h"), fresh("k"), fresh("p"), fresh("q")
            arg = _as_value(self.term(ps[0]))
            t = d.type
            body = T.Let(p, T.Proj(T.Var(h), s.op), T.Let(q, T.App(T.Var(p), arg), T.App(T.Var(q), T.Var(k))))
            return _lam(h, self.ty_sig(), _lam(k, Arrow(self.ty(t.ret), self.ty(t.ans_in)), body))
        if r == "T-Hdlr":
            fields = []
            for cl, p in zip(s.clauses, ps):
                e = self.sig.atm[cl.op]
                clause = _lam(cl.arg, self.ty(e.arg), _lam(cl.cont, Arrow(self.ty(e.res), self.ty(e.ans_in)), self.term(p)))
                fields.append((cl.op, clause))
            return T.Record(tuple(fields))
        if r == "T-Han":
            hd, bd, rd = ps
            h = s.handler
            ret = _lam(h.ret_var, self.ty(bd.type.ret), self.term(rd))
            return static_apply(static_apply(self.term(bd), self.term(hd), fresh), ret, fresh)
        if r in ("T-CSub", "T-VSub"):
            return static_apply(self.sub(d.sub), self.term(ps[0]), fresh)
        raise CpsError(f"unknown typing rule {r}")


def _subject_names(d: Deriv) -> set:
    """Every name in the subjects and environments of ``d``."""
    names = set(d.env)
    T.all_names(d.subject if not isinstance(d.subject, T.Handler) else T.Handle(d.subject, T.Return(T.UNIT_V)), names)
    return names


def cps_sub(d: SubDeriv, sig: Signature | None = None, fresh: T.Fresh | None = None):
    """The coercion term of a subtyping derivation, of simple type
    ``cps_type(lhs) -> cps_type(rhs)``."""
    if not validate_sub(d):
        raise CpsError("invalid subtyping derivation")
    return _Cps(sig or Signature(), fresh or T.Fresh()).sub(d)


def cps_term(d: Deriv, sig: Signature | None = None, fresh: T.Fresh | None = None, validate: bool = True):
    """The CPS image of a typing derivation: a value for value derivations
    and for computations whose image is a value (``return v`` gives ``v``),
    a computation otherwise.  Use ``as_comp`` to run it."""
    sig = sig or Signature()
    if validate and not validate_derivation(d, sig):
        raise CpsError("invalid typing derivation")
    check_signature(sig)
    if fresh is None:
        fresh = T.Fresh(_subject_names(d))
    return _Cps(sig, fresh).term(d)


def cps_program(d: Deriv, sig: Signature | None = None):
    """The CPS target of a whole program as a runnable computation."""
    return as_comp(cps_term(d, sig))
