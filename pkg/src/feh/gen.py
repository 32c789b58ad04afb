"""Seeded, type-directed generators of annotated programs.

Generated programs are typable under the ATM system by construction; the
checker is still run on them by every consumer.  Answer types are drawn from
pure base types, which keeps signatures acceptable to the CPS
transformation.  The generators are deterministic in their ``random.Random``
argument.
"""

from __future__ import annotations

import random
from typing import Optional

from . import terms as T
from .types import BOOL, UNIT, Eff, Fun, OpSig, Pure, Signature

BASES = (UNIT, BOOL)
ANSWERS = (Pure(UNIT), Pure(BOOL))

OP_POOL = {
    "choose": OpSig(UNIT, BOOL, Pure(BOOL), Pure(BOOL)),
    "flip": OpSig(UNIT, BOOL, Pure(UNIT), Pure(BOOL)),
    "emit": OpSig(BOOL, UNIT, Pure(UNIT), Pure(UNIT)),
    "peek": OpSig(UNIT, UNIT, Pure(BOOL), Pure(UNIT)),
}


def random_signature(rng: random.Random) -> Signature:
    names = sorted(OP_POOL)
    chosen = rng.sample(names, rng.randint(1, 2))
    return Signature({}, {op: OP_POOL[op] for op in sorted(chosen)})


class ProgramGen:
    """Generates computations at a requested ATM type."""

    def __init__(self, rng: random.Random, sig: Signature, recursion: bool = False):
        self.rng = rng
        self.sig = sig
        self.recursion = recursion
        self.counter = 0

    def name(self, base: str = "x") -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    # values
    def value(self, env: dict, tau, d: int) -> Optional[T.Value]:
        rng = self.rng
        same = [x for x, t in env.items() if t == tau]
        if same and rng.random() < 0.4:
            return T.Var(rng.choice(same))
        if tau == UNIT:
            return T.UNIT_V
        if tau == BOOL:
            return T.boolv(rng.random() < 0.5)
        if isinstance(tau, Fun):
            x = self.name()
            body = self.comp({**env, x: tau.dom}, tau.cod, max(d - 1, 0))
            return None if body is None else T.Lam(x, body, tau.dom)
        raise ValueError(f"cannot generate a value of type {tau}")

    # computations
    def comp(self, env: dict, rho, d: int) -> Optional[T.Computation]:
        if isinstance(rho, Pure):
            return self.pure(env, rho.ret, d)
        return self.eff(env, rho.ret, rho.ans_in, rho.ans_out, d)

    def fun_type(self):
        rng = self.rng
        dom = rng.choice(BASES)
        if rng.random() < 0.5:
            return Fun(dom, Pure(rng.choice(BASES)))
        return Fun(dom, Eff(rng.choice(BASES), rng.choice(ANSWERS), rng.choice(ANSWERS)))

    def callers(self, env: dict, rho) -> list:
        return [x for x, t in env.items() if isinstance(t, Fun) and t.cod == rho]

    def pure(self, env: dict, tau, d: int) -> T.Computation:
        rng = self.rng
        if d <= 0:
            return T.Return(self.value(env, tau, 0))
        options = ["ret", "if", "let", "letfun", "app", "handle", "beta"]
        if self.recursion and tau in BASES:
            options.append("rec")
        rng.shuffle(options)
        for opt in options:
            c = self.pure_option(opt, env, tau, d)
            if c is not None:
                return c
        return T.Return(self.value(env, tau, 0))

    def pure_option(self, opt, env, tau, d):
        rng = self.rng
        if opt == "ret":
            v = self.value(env, tau, d)
            return None if v is None else T.Return(v)
        if opt == "if":
            return T.If(self.value(env, BOOL, 0), self.pure(env, tau, d - 1), self.pure(env, tau, d - 1))
        if opt == "let":
            t1 = rng.choice(BASES)
            x = self.name()
            return T.Let(x, self.pure(env, t1, d - 1), self.pure({**env, x: t1}, tau, d - 1))
        if opt == "letfun":
            ft = self.fun_type()
            lam = self.value(env, ft, d - 1)
            if lam is None:
                return None
            f = self.name("f")
            return T.Let(f, T.Return(lam), self.pure({**env, f: ft}, tau, d - 1))
        if opt == "app":
            fs = self.callers(env, Pure(tau))
            if not fs:
                return None
            f = rng.choice(fs)
            return T.App(T.Var(f), self.value(env, env[f].dom, 0))
        if opt == "beta":
            t1 = rng.choice(BASES)
            x = self.name()
            body = self.pure({**env, x: t1}, tau, d - 1)
            return T.App(T.Lam(x, body, t1), self.value(env, t1, 0))
        if opt == "handle":
            if tau not in BASES:
                return None
            return self.handle(env, Pure(tau), d)
        if opt == "rec":
            f, u = self.name("f"), self.name("u")
            ft = Fun(UNIT, Pure(tau))
            inner = {**env, f: ft, u: UNIT}
            body = T.If(self.value(inner, BOOL, 0), T.App(T.Var(f), T.UNIT_V), self.pure(inner, tau, d - 2))
            return T.App(T.Rec(f, T.Lam(u, body, UNIT), ft), T.UNIT_V)
        raise ValueError(opt)

    def handle(self, env: dict, result, d: int) -> Optional[T.Computation]:
        rng = self.rng
        t1 = rng.choice(BASES)
        ans_in = rng.choice(ANSWERS)
        body = self.eff(env, t1, ans_in, result, d - 1)
        if body is None:
            return None
        x = self.name()
        ret = self.pure({**env, x: t1}, ans_in.ret, d - 1)
        clauses = []
        for op, e in self.sig.atm.items():
            xa, kk = self.name(), self.name("k")
            cenv = {**env, xa: e.arg, kk: Fun(e.res, e.ans_in)}
            clauses.append(T.OpClause(op, xa, kk, self.pure(cenv, e.ans_out.ret, d - 1)))
        return T.Handle(T.Handler(x, ret, clauses), body)

    def eff(self, env: dict, tau, ans_in, ans_out, d: int) -> Optional[T.Computation]:
        rng = self.rng
        options = ["op", "embed", "letip", "if", "app", "letpure"]
        rng.shuffle(options)
        if d <= 0:
            options = ["op", "embed"]
        for opt in options:
            c = self.eff_option(opt, env, tau, ans_in, ans_out, d)
            if c is not None:
                return c
        return None

    def eff_option(self, opt, env, tau, ans_in, ans_out, d):
        rng = self.rng
        if opt == "embed":
            if ans_in != ans_out:
                return None
            return self.pure(env, tau, d - 1)
        if opt == "op":
            ops = [
                op
                for op, e in self.sig.atm.items()
                if e.res == tau and e.ans_in == ans_in and e.ans_out == ans_out
            ]
            if not ops:
                return None
            op = rng.choice(ops)
            return T.Op(op, self.value(env, self.sig.atm[op].arg, 0))
        if opt == "letip":
            t1 = rng.choice(BASES)
            mid = rng.choice(ANSWERS)
            c1 = self.eff(env, t1, mid, ans_out, d - 1)
            if c1 is None:
                return None
            x = self.name()
            c2 = self.eff({**env, x: t1}, tau, ans_in, mid, d - 1)
            return None if c2 is None else T.Let(x, c1, c2)
        if opt == "letpure":
            t1 = rng.choice(BASES)
            x = self.name()
            c2 = self.eff({**env, x: t1}, tau, ans_in, ans_out, d - 1)
            return None if c2 is None else T.Let(x, self.pure(env, t1, d - 1), c2)
        if opt == "if":
            a = self.eff(env, tau, ans_in, ans_out, d - 1)
            b = self.eff(env, tau, ans_in, ans_out, d - 1)
            if a is None or b is None:
                return None
            return T.If(self.value(env, BOOL, 0), a, b)
        if opt == "app":
            fs = self.callers(env, Eff(tau, ans_in, ans_out))
            if not fs:
                return None
            f = rng.choice(fs)
            return T.App(T.Var(f), self.value(env, env[f].dom, 0))
        raise ValueError(opt)


def random_program(rng: random.Random, depth: int = 6, recursion: bool = False):
    """``(signature, closed computation)`` intended to have type Bool/pure."""
    sig = random_signature(rng)
    gen = ProgramGen(rng, sig, recursion)
    return sig, gen.pure({}, BOOL, depth)


def random_programs(seed: int, count: int, depth: int = 6, recursion: bool = False) -> list:
    rng = random.Random(seed)
    return [random_program(rng, depth, recursion) for _ in range(count)]


def enumerate_types(depth: int) -> tuple[list, list]:
    """Every ATM value type and computation type of at most ``depth`` nested
    constructors: ``(value_types, computation_types)``.  Base types have
    depth 0 and each arrow, pure or effectful constructor adds one."""
    values = list(BASES)
    comps: list = []
    for _ in range(depth):
        new_values = list(BASES) + [Fun(t, r) for t in values for r in comps]
        new_comps = [Pure(t) for t in values] + [Eff(t, a, b) for t in values for a in comps for b in comps]
        values, comps = new_values, new_comps
    return values, comps


# -- untyped terms ------------------------------------------------------------

_OPS = ("op", "get", "set")
_LABELS = ("a", "b", "c")


def random_type(rng: random.Random, depth: int, comp: bool = False):
    """A random ATM type (a computation type when ``comp``)."""
    if comp:
        ret = random_type(rng, depth - 1)
        if depth <= 1 or rng.random() < 0.5:
            return Pure(ret)
        return Eff(ret, random_type(rng, depth - 1, True), random_type(rng, depth - 1, True))
    if depth <= 1 or rng.random() < 0.5:
        return rng.choice(BASES)
    return Fun(random_type(rng, depth - 1), random_type(rng, depth - 1, True))


class TermGen:
    """Random well-scoped (not necessarily well-typed) core terms using every
    constructor."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def name(self, base: str = "x") -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def value(self, scope: list, d: int) -> T.Value:
        rng = self.rng
        choices = ["unit", "bool"] + (["var"] * 2 if scope else [])
        if d > 0:
            choices += ["lam", "rec", "record"]
        kind = rng.choice(choices)
        if kind == "unit":
            return T.UNIT_V
        if kind == "bool":
            return T.boolv(rng.random() < 0.5)
        if kind == "var":
            return T.Var(rng.choice(scope))
        if kind == "lam":
            x = self.name()
            ann = random_type(rng, 2) if rng.random() < 0.5 else None
            return T.Lam(x, self.comp(scope + [x], d - 1), ann)
        if kind == "rec":
            f, x = self.name("f"), self.name()
            ann = random_type(rng, 2) if rng.random() < 0.5 else None
            return T.Rec(f, T.Lam(x, self.comp(scope + [f, x], d - 1)), ann)
        labels = rng.sample(_LABELS, rng.randint(0, 2))
        return T.Record(tuple((l, self.value(scope, d - 1)) for l in labels))

    def comp(self, scope: list, d: int) -> T.Computation:
        rng = self.rng
        if d <= 0:
            return T.Return(self.value(scope, 0))
        kind = rng.choice(["return", "op", "app", "if", "let", "handle", "proj", "ascribe"])
        if kind == "return":
            return T.Return(self.value(scope, d - 1))
        if kind == "op":
            return T.Op(rng.choice(_OPS), self.value(scope, d - 1))
        if kind == "app":
            return T.App(self.value(scope, d - 1), self.value(scope, d - 1))
        if kind == "if":
            return T.If(self.value(scope, 0), self.comp(scope, d - 1), self.comp(scope, d - 1))
        if kind == "let":
            x = self.name()
            return T.Let(x, self.comp(scope, d - 1), self.comp(scope + [x], d - 1))
        if kind == "handle":
            x = self.name()
            clauses = []
            for op in rng.sample(_OPS, rng.randint(0, 2)):
                a, k = self.name(), self.name("k")
                clauses.append(T.OpClause(op, a, k, self.comp(scope + [a, k], d - 1)))
            return T.Handle(T.Handler(x, self.comp(scope + [x], d - 1), clauses), self.comp(scope, d - 1))
        if kind == "proj":
            return T.Proj(self.value(scope, d - 1), rng.choice(_LABELS))
        return T.Ascribe(self.comp(scope, d - 1), random_type(rng, 3, True))


def random_terms(seed: int, count: int, depth: int = 5) -> list:
    rng = random.Random(seed)
    gen = TermGen(rng)
    return [gen.comp([], depth) for _ in range(count)]
