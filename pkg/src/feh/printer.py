"""Pretty-printer for surface trees, core terms and program files.

Output is deterministic and reparses to the same surface tree.  Forms that
extend to the right (``fun``, ``rec``, ``let``, ``if``, ``with``, ``mrec`` and
sequencing) are parenthesized whenever something follows them.
"""

from __future__ import annotations

from . import sugar as S
from . import terms as T

# Precedence levels: a form may be printed bare at a position whose level is
# at most the form's own level.
EXPR, SEQ_LEFT, APP, HEAD, ARG = 0, 1, 2, 3, 4


def _binder(var, ann) -> str:
    return var if ann is None else f"({var} : {ann})"


def _paren(text: str, need: bool) -> str:
    return f"({text})" if need else text


def print_surface(s, level: int = EXPR) -> str:
    p = print_surface
    if isinstance(s, S.SVar):
        return s.name
    if isinstance(s, S.SUnit):
        return "()"
    if isinstance(s, S.SBool):
        return "true" if s.value else "false"
    if isinstance(s, S.SRecord):
        return "{" + ", ".join(f"{l} = {p(v)}" for l, v in s.fields) + "}"
    if isinstance(s, S.SHandler):
        parts = [f"return {s.ret_var} -> {p(s.ret_body)}"]
        parts += [f"{c.op}({c.arg}; {c.cont}) -> {p(c.body)}" for c in s.clauses]
        return "{" + "; ".join(parts) + "}"
    if isinstance(s, S.SAscribe):
        return f"({p(s.body)} : {s.type})"
    if isinstance(s, S.SProj):
        return f"{p(s.record, ARG)}.{s.label}"
    if isinstance(s, S.SApp):
        return _paren(f"{p(s.fn, HEAD)} {p(s.arg, ARG)}", level > HEAD)
    if isinstance(s, S.SReturn):
        return _paren(f"return {p(s.value, ARG)}", level > APP)
    if isinstance(s, S.SDo):
        return _paren(f"do {s.op} {p(s.arg, ARG)}", level > APP)
    if isinstance(s, S.SSeq):
        text = f"{p(s.first, SEQ_LEFT)}; {p(s.second)}"
    elif isinstance(s, S.SLam):
        text = f"fun {_binder(s.var, s.ann)} -> {p(s.body)}"
    elif isinstance(s, S.SRec):
        text = f"rec {_binder(s.var, s.ann)}. {p(s.body)}"
    elif isinstance(s, S.SLet):
        text = f"let {s.var} = {p(s.bound)} in {p(s.body)}"
    elif isinstance(s, S.SIf):
        text = f"if {p(s.cond)} then {p(s.then)} else {p(s.else_)}"
    elif isinstance(s, S.SWith):
        text = f"with {p(s.handler, ARG)} handle {p(s.body)}"
    elif isinstance(s, S.SMRec):
        binds = " and ".join(f"{_binder(n, a)} = {p(v)}" for n, a, v in s.bindings)
        text = f"mrec {binds} in {p(s.body)}"
    else:
        raise TypeError(f"cannot print {type(s).__name__}")
    return _paren(text, level > EXPR)


def print_term(t) -> str:
    """Print a core term, handler, or surface tree."""
    if isinstance(t, (T.Term, T.Handler)):
        return print_surface(S.to_surface(t))
    return print_surface(t)


def print_program(prog) -> str:
    lines = []
    if prog.st_sig:
        lines.append("signature st {")
        for op, (arg, res) in prog.st_sig.items():
            lines.append(f"  effect {op} : {_arrow(arg, res)}")
        lines.append("}")
    if prog.atm_sig:
        lines.append("signature atm {")
        for op, sig in prog.atm_sig.items():
            lines.append(f"  effect {op} : {sig}")
        lines.append("}")
    for name, body in prog.defs:
        lines.append(f"def {name} = {print_surface(body)}")
    lines.append(f"main {print_surface(prog.main)}")
    return "\n".join(lines) + "\n"


def _arrow(arg, res) -> str:
    from .types import Arrow

    return str(Arrow(arg, res))


def print_any(x) -> str:
    from .parser import ProgramFile

    if isinstance(x, ProgramFile):
        return print_program(x)
    return print_term(x)
