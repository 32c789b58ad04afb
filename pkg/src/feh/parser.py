"""Lexer and recursive-descent parser for ``.feh`` program files.

File layout::

    signature st  { effect op : S -> S' ... }      // optional
    signature atm { effect op : T -> T' / R1 => R2 ... }   // optional
    def name = term                                 // zero or more
    main term

A file holding just a term is read as ``main term``.  Definitions are macros:
``expand`` inlines them into ``main`` before sugar expansion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import sugar as S
from .types import (
    BOOL,
    UNIT,
    Arrow,
    BaseType,
    Eff,
    Fun,
    OpSig,
    Pure,
    RecordType,
    Signature,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"{line}:{col}: {message}" if line else message)


KEYWORDS = {
    "fun", "rec", "let", "in", "if", "then", "else", "return", "do", "with",
    "handle", "mrec", "and", "true", "false", "def", "main", "signature", "effect",
}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+|//[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<punct>->|=>|[(){};,=:./])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'kw', 'punct', 'eof'
    text: str
    line: int
    col: int
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        piece = m.group()
        if kind != "ws":
            if kind == "ident" and piece in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, piece, line, pos - line_start + 1, pos, m.end()))
        newlines = piece.count("\n")
        if newlines:
            line += newlines
            line_start = pos + piece.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos, pos))
    return tokens


# -- raw types ----------------------------------------------------------------


@dataclass(frozen=True)
class _RArrow:
    dom: object
    cod: object


@dataclass(frozen=True)
class _RPure:
    ret: object


@dataclass(frozen=True)
class _REff:
    ret: object
    ans_in: object
    ans_out: object


@dataclass(frozen=True)
class _RRecord:
    fields: tuple


def _has_slash(r) -> bool:
    if isinstance(r, (_RPure, _REff)):
        return True
    if isinstance(r, _RArrow):
        return _has_slash(r.dom) or _has_slash(r.cod)
    if isinstance(r, _RRecord):
        return any(_has_slash(t) for _, t in r.fields)
    return False


def _simple(r):
    if isinstance(r, BaseType):
        return r
    if isinstance(r, _RArrow):
        return Arrow(_simple(r.dom), _simple(r.cod))
    if isinstance(r, _RRecord):
        return RecordType(tuple((l, _simple(t)) for l, t in r.fields))
    raise ValueError("not a simple type")


def _vtype(r):
    if isinstance(r, BaseType):
        return r
    if isinstance(r, _RArrow):
        return Fun(_vtype(r.dom), _ctype(r.cod))
    if isinstance(r, _RRecord):
        raise ValueError("record types have no ATM reading")
    raise ValueError("expected a value type, found a computation type")


def _ctype(r):
    if isinstance(r, _RPure):
        return Pure(_vtype(r.ret))
    if isinstance(r, _REff):
        return Eff(_vtype(r.ret), _ctype(r.ans_in), _ctype(r.ans_out))
    return Pure(_vtype(r))


def classify_type(r):
    """Simple type when no ``/`` occurs, otherwise an ATM type.

    In ATM types a bare ``T`` in computation position means ``T / pure``.
    """
    if not _has_slash(r):
        return _simple(r)
    if isinstance(r, (_RPure, _REff)):
        return _ctype(r)
    return _vtype(r)


# -- program files ------------------------------------------------------------


@dataclass
class ProgramFile:
    st_sig: dict = field(default_factory=dict)
    atm_sig: dict = field(default_factory=dict)
    defs: tuple = ()
    main: object = None

    def signature(self) -> Signature:
        return Signature(dict(self.st_sig), dict(self.atm_sig))

    def inlined_main(self):
        env = {}
        for name, body in self.defs:
            env[name] = S.inline_definitions(body, env)
        return S.inline_definitions(self.main, env)

    def core(self):
        """The main computation with definitions inlined and sugar expanded."""
        return S.expand_sugar(self.inlined_main())

    def with_defs(self, **bodies) -> "ProgramFile":
        """A copy with the named definitions replaced by surface terms."""
        unknown = set(bodies) - {name for name, _ in self.defs}
        if unknown:
            raise KeyError(f"no definitions named {sorted(unknown)}")
        defs = tuple((name, bodies.get(name, body)) for name, body in self.defs)
        return ProgramFile(dict(self.st_sig), dict(self.atm_sig), defs, self.main)

    def with_main(self, main) -> "ProgramFile":
        return ProgramFile(dict(self.st_sig), dict(self.atm_sig), self.defs, main)


# -- parser -------------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("kw", "punct") and t.text == text

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        return self.advance().text

    # program files
    def program(self) -> ProgramFile:
        prog = ProgramFile()
        if not (self.at("signature") or self.at("def") or self.at("main")):
            prog.main = self.expr()
            self.expect_eof()
            return prog
        defs = []
        while self.at("signature"):
            self.advance()
            which = self.ident()
            if which not in ("st", "atm"):
                self.error("expected 'st' or 'atm' after 'signature'", self.peek(-1))
            self.signature_block(prog.st_sig if which == "st" else prog.atm_sig, which)
        while self.at("def"):
            self.advance()
            name = self.ident()
            if name in [n for n, _ in defs]:
                self.error(f"duplicate definition {name}", self.peek(-1))
            self.expect("=")
            defs.append((name, self.expr()))
        self.expect("main")
        prog.main = self.expr()
        prog.defs = tuple(defs)
        self.expect_eof()
        return prog

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")

    def signature_block(self, table: dict, which: str):
        self.expect("{")
        while self.at("effect"):
            self.advance()
            name_tok = self.tok
            op = self.ident()
            if op in table:
                self.error(f"duplicate signature entry for {op}", name_tok)
            self.expect(":")
            start = self.tok
            raw = self.type_()
            try:
                ty = classify_type(raw)
            except ValueError as exc:
                raise ParseError(str(exc), start.line, start.col) from None
            if which == "st":
                if not isinstance(ty, Arrow):
                    raise ParseError(f"simple signature entry for {op} must be S -> S'", start.line, start.col)
                table[op] = (ty.dom, ty.cod)
            else:
                if not isinstance(ty, Fun) or not isinstance(ty.cod, Eff):
                    raise ParseError(
                        f"ATM signature entry for {op} must be T -> T' / R1 => R2", start.line, start.col
                    )
                table[op] = OpSig(ty.dom, ty.cod.ret, ty.cod.ans_in, ty.cod.ans_out)
        self.expect("}")

    # types
    def type_(self):
        base = self.type_atom()
        if self.at("->"):
            self.advance()
            return _RArrow(base, self.type_())
        if self.at("/"):
            self.advance()
            if self.at_pure():
                self.advance()
                return _RPure(base)
            ans_in = self.answer_in()
            self.expect("=>")
            return _REff(base, ans_in, self.type_())
        return base

    def answer_in(self):
        base = self.type_atom()
        if self.at("/"):
            self.advance()
            if not self.at_pure():
                self.error("an effectful answer type must be parenthesized")
            self.advance()
            return _RPure(base)
        if isinstance(base, (_RPure, _REff)):
            return base
        self.error("expected a computation type")

    def at_pure(self) -> bool:
        return self.tok.kind == "ident" and self.tok.text == "pure"

    def type_atom(self):
        t = self.tok
        if t.kind == "ident" and t.text == "Unit":
            self.advance()
            return UNIT
        if t.kind == "ident" and t.text == "Bool":
            self.advance()
            return BOOL
        if self.at("("):
            self.advance()
            inner = self.type_()
            self.expect(")")
            return inner
        if self.at("{"):
            self.advance()
            fields = []
            while not self.at("}"):
                label_tok = self.tok
                label = self.ident()
                if label in [l for l, _ in fields]:
                    self.error(f"duplicate label {label}", label_tok)
                self.expect(":")
                fields.append((label, self.type_()))
                if not self.at("}"):
                    self.expect(",")
            self.advance()
            return _RRecord(tuple(fields))
        self.error("expected a type")

    def full_type(self):
        start = self.tok
        raw = self.type_()
        try:
            return classify_type(raw)
        except ValueError as exc:
            raise ParseError(str(exc), start.line, start.col) from None

    # terms
    def binder(self):
        if self.at("("):
            self.advance()
            name = self.ident()
            self.expect(":")
            ann = self.full_type()
            self.expect(")")
            return name, ann
        return self.ident(), None

    def clause_start(self, k: int) -> bool:
        """Whether the tokens at offset ``k`` begin a handler clause."""
        if self.at("return", k):
            return self.peek(k + 1).kind == "ident" and self.at("->", k + 2)
        return (
            self.peek(k).kind == "ident"
            and self.at("(", k + 1)
            and self.peek(k + 2).kind == "ident"
            and self.at(";", k + 3)
            and self.peek(k + 4).kind == "ident"
            and self.at(")", k + 5)
            and self.at("->", k + 6)
        )

    def expr(self):
        t = self.tok
        if t.kind == "kw":
            if t.text == "fun":
                self.advance()
                var, ann = self.binder()
                self.expect("->")
                return S.SLam(var, ann, self.expr())
            if t.text == "rec":
                self.advance()
                var, ann = self.binder()
                self.expect(".")
                return S.SRec(var, ann, self.expr())
            if t.text == "let":
                self.advance()
                var = self.ident()
                self.expect("=")
                bound = self.expr()
                self.expect("in")
                return S.SLet(var, bound, self.expr())
            if t.text == "if":
                self.advance()
                cond = self.expr()
                self.expect("then")
                then = self.expr()
                self.expect("else")
                return S.SIf(cond, then, self.expr())
            if t.text == "with":
                self.advance()
                handler = self.postfix()
                self.expect("handle")
                return S.SWith(handler, self.expr())
            if t.text == "mrec":
                self.advance()
                bindings = []
                while True:
                    name_tok = self.tok
                    var, ann = self.binder()
                    if var in [b[0] for b in bindings]:
                        self.error(f"duplicate mrec name {var}", name_tok)
                    self.expect("=")
                    bindings.append((var, ann, self.expr()))
                    if not self.at("and"):
                        break
                    self.advance()
                self.expect("in")
                return S.SMRec(tuple(bindings), self.expr())
        first = self.app()
        if self.at(";") and not self.clause_start(1):
            self.advance()
            return S.SSeq(first, self.expr())
        return first

    def app(self):
        if self.at("return"):
            self.advance()
            return S.SReturn(self.postfix())
        if self.at("do"):
            self.advance()
            op = self.ident()
            return S.SDo(op, self.postfix())
        head = self.postfix()
        while self.starts_atom():
            head = S.SApp(head, self.postfix())
        return head

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return True
        if t.kind == "kw":
            return t.text in ("true", "false")
        return t.kind == "punct" and t.text in ("(", "{")

    def postfix(self):
        node = self.atom()
        while self.at(".") and self.peek(1).kind == "ident":
            self.advance()
            node = S.SProj(node, self.ident())
        return node

    def atom(self):
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return S.SVar(t.text)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return S.SBool(t.text == "true")
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return S.SUnit()
            inner = self.expr()
            if self.at(":"):
                self.advance()
                ty_tok = self.tok
                ty = self.full_type()
                if not isinstance(ty, (Pure, Eff)):
                    self.error("an ascription needs a computation type (T / pure or T / R1 => R2)", ty_tok)
                self.expect(")")
                return S.SAscribe(inner, ty)
            self.expect(")")
            return inner
        if self.at("{"):
            return self.brace()
        self.error("expected a term")

    def brace(self):
        open_tok = self.expect("{")
        if self.at("return") or (self.tok.kind == "ident" and self.at("(", 1)):
            return self.handler(open_tok)
        fields = []
        while not self.at("}"):
            label_tok = self.tok
            label = self.ident()
            if label in [l for l, _ in fields]:
                self.error(f"duplicate record label {label}", label_tok)
            self.expect("=")
            fields.append((label, self.expr()))
            if not self.at("}"):
                self.expect(",")
        self.advance()
        return S.SRecord(tuple(fields))

    def handler(self, open_tok):
        ret = None
        clauses = []
        while True:
            if self.at("return"):
                ret_tok = self.advance()
                if ret is not None:
                    self.error("handler has more than one return clause", ret_tok)
                var = self.ident()
                self.expect("->")
                ret = (var, self.expr())
            else:
                op_tok = self.tok
                op = self.ident()
                if op in [c.op for c in clauses]:
                    self.error(f"duplicate clause for operation {op}", op_tok)
                self.expect("(")
                x = self.ident()
                self.expect(";")
                k_tok = self.tok
                k = self.ident()
                if k == x:
                    self.error(f"clause {op} uses {x} for both parameters", k_tok)
                self.expect(")")
                self.expect("->")
                clauses.append(S.SClause(op, x, k, self.expr()))
            if self.at(";"):
                self.advance()
                continue
            self.expect("}")
            break
        if ret is None:
            raise ParseError("handler has no return clause", open_tok.line, open_tok.col)
        return S.SHandler(ret[0], ret[1], tuple(clauses))


def parse_term(text: str):
    """Parse a single surface term (no file header)."""
    p = Parser(text)
    t = p.expr()
    p.expect_eof()
    return t


def parse_type(text: str):
    p = Parser(text)
    t = p.full_type()
    p.expect_eof()
    return t


def parse(text: str) -> ProgramFile:
    """Parse a program file and check that every invoked operation is declared."""
    prog = Parser(text).program()
    declared = set(prog.st_sig) | set(prog.atm_sig)
    used = set()
    for _, body in prog.defs:
        used |= _invoked(body)
    used |= _invoked(prog.main)
    missing = sorted(used - declared)
    if missing:
        raise ParseError(f"unknown operation(s) with no signature entry: {', '.join(missing)}")
    return prog


def _invoked(s) -> set:
    out = set()
    stack = [s]
    while stack:
        n = stack.pop()
        if isinstance(n, S.SDo):
            out.add(n.op)
        stack.extend(S._children(n))
    return out


def parse_file(path) -> ProgramFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
