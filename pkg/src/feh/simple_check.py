"""Checker for the simple type system, extended with records.

The rules are syntax-directed, so checking is one synthesis pass.  Binder
annotations may be simple or ATM types; ATM annotations are read through
``erase``.  A lambda needs an annotation unless its type is known from
context: checked against an arrow type, or applied directly to an argument
whose type synthesizes.
"""

from __future__ import annotations

from typing import Optional

from . import terms as T
from .types import BOOL, UNIT, Arrow, RecordType, Signature, erase


class StTypeError(TypeError):
    def __init__(self, rule: str, message: str, term=None):
        self.rule = rule
        self.term = term
        where = ""
        if term is not None:
            from .printer import print_term

            text = print_term(term)
            where = f" in `{text if len(text) < 120 else text[:117] + '...'}`"
        super().__init__(f"[{rule}] {message}{where}")


class _Checker:
    def __init__(self, sig: Signature):
        self.sig = sig
        # closed values have the same type in every environment; expanded
        # mutual recursion shares them heavily, so remember their types
        self.closed = {}

    # values
    def synth_value(self, env: dict, v) -> object:
        tp = type(v)
        if tp is T.Var:
            if v.name not in env:
                raise StTypeError("St-Var", f"unbound variable {v.name}", v)
            return env[v.name]
        if tp is T.UnitV:
            return UNIT
        if tp is T.BoolV:
            return BOOL
        if (tp is T.Lam or tp is T.Rec) and not v.fv:
            hit = self.closed.get(id(v))
            if hit is not None:
                return hit[1]
            sigma = self.synth_open(env, v, tp)
            self.closed[id(v)] = (v, sigma)
            return sigma
        return self.synth_open(env, v, tp)

    def synth_open(self, env: dict, v, tp) -> object:
        if tp is T.Lam:
            if v.ann is None:
                raise StTypeError("St-Lam", f"needs an annotation on binder {v.var}", v)
            dom = erase(v.ann)
            return Arrow(dom, self.synth_comp({**env, v.var: dom}, v.body))
        if tp is T.Rec:
            if v.ann is None:
                raise StTypeError("St-Rec", f"needs an annotation on binder {v.var}", v)
            sigma = erase(v.ann)
            self.check_value({**env, v.var: sigma}, v.body, sigma)
            return sigma
        if tp is T.Record:
            return RecordType(tuple((l, self.synth_value(env, x)) for l, x in v.fields))
        raise StTypeError("St-Value", f"not a value: {tp.__name__}", v)

    def check_value(self, env: dict, v, sigma) -> None:
        if type(v) is T.Lam and isinstance(sigma, Arrow):
            if v.ann is not None and erase(v.ann) != sigma.dom:
                raise StTypeError("St-Lam", f"binder {v.var} annotated {erase(v.ann)}, expected {sigma.dom}", v)
            self.check_comp({**env, v.var: sigma.dom}, v.body, sigma.cod)
            return
        got = self.synth_value(env, v)
        if got != sigma:
            raise StTypeError("St-Value", f"expected {sigma}, found {got}", v)

    # computations
    def synth_comp(self, env: dict, c) -> object:
        tp = type(c)
        if tp is T.Return:
            return self.synth_value(env, c.value)
        if tp is T.Op:
            entry = self.sig.st_entry(c.op)
            if entry is None:
                raise StTypeError("St-Op", f"operation {c.op} has no signature entry", c)
            arg, res = entry
            self.check_value(env, c.arg, arg)
            return res
        if tp is T.App:
            fn = c.fn
            if type(fn) is T.Lam and fn.ann is None:
                dom = self.synth_value(env, c.arg)
                return self.synth_comp({**env, fn.var: dom}, fn.body)
            ft = self.synth_value(env, fn)
            if not isinstance(ft, Arrow):
                raise StTypeError("St-App", f"applying a value of type {ft}", c)
            self.check_value(env, c.arg, ft.dom)
            return ft.cod
        if tp is T.If:
            self.check_value(env, c.cond, BOOL)
            try:
                sigma = self.synth_comp(env, c.then)
            except StTypeError:
                sigma = self.synth_comp(env, c.else_)
                self.check_comp(env, c.then, sigma)
                return sigma
            self.check_comp(env, c.else_, sigma)
            return sigma
        if tp is T.Let:
            sigma = self.synth_comp(env, c.bound)
            return self.synth_comp({**env, c.var: sigma}, c.body)
        if tp is T.Handle:
            sigma = self.synth_comp(env, c.body)
            return self.handler(env, c.handler, sigma, None)
        if tp is T.Proj:
            rt = self.synth_value(env, c.record)
            if not isinstance(rt, RecordType):
                raise StTypeError("St-Proj", f"projecting from a value of type {rt}", c)
            field = rt.get(c.label)
            if field is None:
                raise StTypeError("St-Proj", f"record type {rt} has no label {c.label}", c)
            return field
        if tp is T.Ascribe:
            sigma = erase(c.type)
            self.check_comp(env, c.body, sigma)
            return sigma
        raise StTypeError("St-Comp", f"not a computation: {tp.__name__}", c)

    def check_comp(self, env: dict, c, sigma) -> None:
        tp = type(c)
        if tp is T.Return:
            self.check_value(env, c.value, sigma)
            return
        if tp is T.If:
            self.check_value(env, c.cond, BOOL)
            self.check_comp(env, c.then, sigma)
            self.check_comp(env, c.else_, sigma)
            return
        if tp is T.Let:
            bound = self.synth_comp(env, c.bound)
            self.check_comp({**env, c.var: bound}, c.body, sigma)
            return
        if tp is T.Handle:
            body = self.synth_comp(env, c.body)
            self.handler(env, c.handler, body, sigma)
            return
        got = self.synth_comp(env, c)
        if got != sigma:
            raise StTypeError("St-Comp", f"expected {sigma}, found {got}", c)

    def handler(self, env: dict, h: T.Handler, sigma, expected) -> object:
        """Type ``h : sigma -> answer``; every clause shares the one answer type."""
        ret_env = {**env, h.ret_var: sigma}
        if expected is None:
            answer = self.synth_comp(ret_env, h.ret_body)
        else:
            self.check_comp(ret_env, h.ret_body, expected)
            answer = expected
        for cl in h.clauses:
            entry = self.sig.st_entry(cl.op)
            if entry is None:
                raise StTypeError("St-Hdlr", f"operation {cl.op} has no signature entry", h.ret_body)
            arg, res = entry
            clause_env = {**env, cl.arg: arg, cl.cont: Arrow(res, answer)}
            try:
                self.check_comp(clause_env, cl.body, answer)
            except StTypeError as exc:
                raise StTypeError(
                    "St-Hdlr", f"clause {cl.op} does not have the answer type {answer}: {exc}", cl.body
                ) from None
        return answer


def check_st_or_raise(sig: Signature, env: dict, t) -> object:
    chk = _Checker(sig)
    if isinstance(t, T.Value):
        return chk.synth_value(dict(env), t)
    return chk.synth_comp(dict(env), t)


def check_st(sig: Signature, env: dict, t) -> Optional[object]:
    """The simple type of ``t`` under ``env``, or None when it has none."""
    try:
        return check_st_or_raise(sig, env, t)
    except StTypeError:
        return None
