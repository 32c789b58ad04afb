"""Two-register Minsky machines: a text format, an exact simulator, and the
compiler into the MM program family.

Text format, one state per line (``#`` starts a comment)::

    qJ: inc rI goto qK
    qJ: ifz rI goto qK else dec goto qL
    qJ: halt

States must be numbered ``q0`` to ``qn`` with each defined once; ``q0`` is
initial and both registers start at zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import terms as T
from ._kernel import STEPPED, reduce, refocus
from .parser import parse


class MachineError(ValueError):
    pass


@dataclass(frozen=True)
class Inc:
    reg: int
    next: int


@dataclass(frozen=True)
class DecOrZero:
    """If register ``reg`` is zero go to ``zero``, else decrement it and go
    to ``dec``."""

    reg: int
    zero: int
    dec: int


@dataclass(frozen=True)
class Halt:
    pass


Instr = Union[Inc, DecOrZero, Halt]


@dataclass(frozen=True)
class Machine:
    instrs: tuple

    def __post_init__(self):
        if not self.instrs:
            raise MachineError("a machine needs at least one state")
        n = len(self.instrs)
        for q, ins in enumerate(self.instrs):
            if isinstance(ins, Inc):
                targets, reg = (ins.next,), ins.reg
            elif isinstance(ins, DecOrZero):
                targets, reg = (ins.zero, ins.dec), ins.reg
            elif isinstance(ins, Halt):
                continue
            else:
                raise MachineError(f"q{q}: not an instruction: {ins!r}")
            if reg not in (0, 1):
                raise MachineError(f"q{q}: register r{reg} does not exist")
            for t in targets:
                if not 0 <= t < n:
                    raise MachineError(f"q{q}: state q{t} does not exist")

    @property
    def states(self) -> int:
        return len(self.instrs)


@dataclass(frozen=True)
class Config:
    state: int
    r0: int
    r1: int


@dataclass(frozen=True)
class Halted:
    steps: int


@dataclass(frozen=True)
class OutOfFuel:
    fuel: int


_LINE = re.compile(
    r"^q(\d+)\s*:\s*(?:"
    r"(?P<inc>inc\s+r(?P<ir>\d+)\s+goto\s+q(?P<in>\d+))"
    r"|(?P<ifz>ifz\s+r(?P<zr>\d+)\s+goto\s+q(?P<zz>\d+)\s+else\s+dec\s+goto\s+q(?P<zd>\d+))"
    r"|(?P<halt>halt))\s*$"
)


def parse_machine(text: str) -> Machine:
    found = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m is None:
            raise MachineError(f"line {lineno}: cannot parse {line!r}")
        q = int(m.group(1))
        if q in found:
            raise MachineError(f"line {lineno}: state q{q} defined twice")
        if m.group("inc"):
            found[q] = Inc(int(m.group("ir")), int(m.group("in")))
        elif m.group("ifz"):
            found[q] = DecOrZero(int(m.group("zr")), int(m.group("zz")), int(m.group("zd")))
        else:
            found[q] = Halt()
    if sorted(found) != list(range(len(found))):
        raise MachineError("states must be numbered q0..qn without gaps")
    return Machine(tuple(found[q] for q in range(len(found))))


def print_machine(m: Machine) -> str:
    lines = []
    for q, ins in enumerate(m.instrs):
        if isinstance(ins, Inc):
            lines.append(f"q{q}: inc r{ins.reg} goto q{ins.next}")
        elif isinstance(ins, DecOrZero):
            lines.append(f"q{q}: ifz r{ins.reg} goto q{ins.zero} else dec goto q{ins.dec}")
        else:
            lines.append(f"q{q}: halt")
    return "\n".join(lines) + "\n"


def load_machine(path) -> Machine:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


def step_machine(m: Machine, c: Config) -> Config | None:
    """The successor configuration, or None at a halt instruction."""
    ins = m.instrs[c.state]
    regs = [c.r0, c.r1]
    if isinstance(ins, Inc):
        regs[ins.reg] += 1
        return Config(ins.next, *regs)
    if isinstance(ins, DecOrZero):
        if regs[ins.reg] == 0:
            return Config(ins.zero, *regs)
        regs[ins.reg] -= 1
        return Config(ins.dec, *regs)
    return None


def run_machine(m: Machine, fuel: int) -> list:
    """The configurations visited from ``(q0, 0, 0)``, at most ``fuel``
    transitions."""
    c = Config(0, 0, 0)
    out = [c]
    for _ in range(fuel):
        c = step_machine(m, c)
        if c is None:
            break
        out.append(c)
    return out


def simulate(m: Machine, fuel: int) -> Union[Halted, OutOfFuel]:
    """Run from ``(q0, 0, 0)``.  ``Halted(n)`` when a halt instruction is
    reached after ``n <= fuel`` transitions."""
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    c = Config(0, 0, 0)
    for steps in range(fuel + 1):
        if isinstance(m.instrs[c.state], Halt):
            return Halted(steps)
        if steps == fuel:
            break
        c = step_machine(m, c)
    return OutOfFuel(fuel)


# -- compilation --------------------------------------------------------------

NAT = "(Unit -> Unit)"


def _instr_source(ins) -> str:
    call_args = "x0 x1"
    if isinstance(ins, Inc):
        i = ins.reg
        return f"let x{i} = fun (y : Unit) -> do succ x{i} in f{ins.next} {call_args}"
    if isinstance(ins, DecOrZero):
        i = ins.reg
        return (
            f"with {{return x -> f{ins.zero} {call_args}; succ(x{i}; k) -> f{ins.dec} {call_args}}} "
            f"handle x{i} ()"
        )
    return "()"


def compile_source(m: Machine) -> str:
    """The MM program of ``m`` as source text.

    State ``qj`` becomes ``fj``; registers are Church-like numerals where
    ``fun x -> ()`` is zero and ``fun y -> do succ r`` is one more than ``r``.
    Binder annotations give the simple types of the family.
    """
    fty = f"{NAT} -> {NAT} -> Unit"
    lines = [
        "// Compiled from a two-register Minsky machine.",
        "signature st {",
        f"  effect succ : {NAT} -> Unit",
        "}",
        "main",
    ]
    for q, ins in enumerate(m.instrs):
        head = "  mrec" if q == 0 else "  and"
        lines.append(f"{head} (f{q} : {fty}) = fun (x0 : {NAT}) -> fun (x1 : {NAT}) ->")
        lines.append(f"      {_instr_source(ins)}")
    lines.append("  in (f0 (fun (x : Unit) -> ()) (fun (x : Unit) -> ())); true")
    return "\n".join(lines) + "\n"


def compile_mm(m: Machine):
    """The MM program of ``m`` as a parsed program file."""
    return parse(compile_source(m))


# -- observing a compiled run -------------------------------------------------


def register_value(v) -> int:
    """The number a register value encodes: the count of nested
    ``fun y -> do succ r`` wrappers around ``fun x -> ()``."""
    n = 0
    while True:
        if type(v) is not T.Lam:
            raise ValueError("not a register value")
        body = v.body
        if type(body) is T.Op and body.op == "succ":
            n += 1
            v = body.arg
            continue
        if type(body) is T.Return and type(body.value) is T.UnitV:
            return n
        raise ValueError("not a register value")


def observed_configs(program, budget: int) -> list:
    """Machine configurations read off the evaluation of a compiled program.

    A state function ``fj`` is entered when the redex applies a ``rec fj``
    value to the first register; the second register arrives at the next
    application of the resulting ``fun x1`` abstraction.
    """
    out = []
    pending = None
    c, k = refocus(program.core(), None)
    for _ in range(budget):
        if type(c) is T.App:
            fn = c.fn
            if type(fn) is T.Rec and T.base_name(fn.var).startswith("f"):
                pending = (int(T.base_name(fn.var)[1:]), register_value(c.arg))
            elif pending is not None and type(fn) is T.Lam and T.base_name(fn.var) == "x1":
                out.append(Config(pending[0], pending[1], register_value(c.arg)))
                pending = None
        status, c, k = reduce(c, k)
        if status != STEPPED:
            break
        c, k = refocus(c, k)
    return out
