"""Type representations shared by the simple and the ATM type systems.

Base types are shared.  Simple types add ``Arrow`` and ``RecordType``; ATM
value types add ``Fun`` (whose codomain is a computation type) and the two
computation-type forms ``Pure`` and ``Eff``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self) -> str:
        return self.name


UNIT = BaseType("Unit")
BOOL = BaseType("Bool")


# -- simple types -------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self) -> str:
        dom = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True)
class RecordType:
    """Record type; fields are kept sorted by label so equality ignores order."""

    fields: tuple[tuple[str, "SimpleType"], ...]

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda f: f[0])))

    @classmethod
    def of(cls, mapping: dict) -> "RecordType":
        return cls(tuple(mapping.items()))

    def get(self, label: str):
        for name, ty in self.fields:
            if name == label:
                return ty
        return None

    def __str__(self) -> str:
        inner = ", ".join(f"{label} : {ty}" for label, ty in self.fields)
        return "{" + inner + "}"


SimpleType = Union[BaseType, Arrow, RecordType]


# -- ATM types ----------------------------------------------------------------


@dataclass(frozen=True)
class Fun:
    """Value type ``dom -> cod`` with ``cod`` a computation type."""

    dom: "ValueType"
    cod: "CompType"

    def __str__(self) -> str:
        dom = f"({self.dom})" if isinstance(self.dom, Fun) else str(self.dom)
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True)
class Pure:
    ret: "ValueType"

    def __str__(self) -> str:
        return f"{_atomic(self.ret)} / pure"


@dataclass(frozen=True)
class Eff:
    """Effectful computation returning ``ret`` and changing the answer type
    from ``ans_in`` to ``ans_out``."""

    ret: "ValueType"
    ans_in: "CompType"
    ans_out: "CompType"

    def __str__(self) -> str:
        ans_in = f"({self.ans_in})" if isinstance(self.ans_in, Eff) else str(self.ans_in)
        return f"{_atomic(self.ret)} / {ans_in} => {self.ans_out}"


def _atomic(t) -> str:
    return f"({t})" if isinstance(t, (Fun, Arrow)) else str(t)


ValueType = Union[BaseType, Fun]
CompType = Union[Pure, Eff]
AtmType = Union[BaseType, Fun, Pure, Eff]


def is_pure(rho: CompType) -> bool:
    return isinstance(rho, Pure)


def is_comp_type(t) -> bool:
    return isinstance(t, (Pure, Eff))


def erase(t) -> SimpleType:
    """Forget answer types: the simple type an ATM-typed term has under ``|-st``."""
    if isinstance(t, BaseType):
        return t
    if isinstance(t, Fun):
        return Arrow(erase(t.dom), erase(t.cod))
    if isinstance(t, (Pure, Eff)):
        return erase(t.ret)
    if isinstance(t, Arrow):
        return Arrow(erase(t.dom), erase(t.cod))
    if isinstance(t, RecordType):
        return RecordType(tuple((l, erase(s)) for l, s in t.fields))
    raise TypeError(f"not a type: {t!r}")


def lift(t) -> ValueType:
    """Read a simple type as an ATM value type with pure function codomains."""
    if isinstance(t, BaseType):
        return t
    if isinstance(t, Arrow):
        return Fun(lift(t.dom), Pure(lift(t.cod)))
    if isinstance(t, Fun):
        return t
    raise ValueError(f"type {t} has no ATM reading")


# -- signatures ---------------------------------------------------------------


@dataclass(frozen=True)
class OpSig:
    """ATM operation type ``arg -> res / ans_in => ans_out``."""

    arg: ValueType
    res: ValueType
    ans_in: CompType
    ans_out: CompType

    @property
    def comp(self) -> Eff:
        return Eff(self.res, self.ans_in, self.ans_out)

    def __str__(self) -> str:
        return f"{_atomic(self.arg)} -> {self.comp}"


@dataclass
class Signature:
    st: dict = field(default_factory=dict)   # op -> (arg, res) simple types
    atm: dict = field(default_factory=dict)  # op -> OpSig

    def st_entry(self, op: str):
        """Simple type of ``op``; falls back to the erasure of its ATM entry."""
        if op in self.st:
            return self.st[op]
        if op in self.atm:
            sig = self.atm[op]
            return erase(sig.arg), erase(sig.res)
        return None

    def ops(self) -> set:
        return set(self.st) | set(self.atm)
