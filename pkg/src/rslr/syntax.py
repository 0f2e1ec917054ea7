"""Concrete syntax: a hand-written lexer, recursive-descent parser and printer.

Grammar sketch::

    term   ::= '\\' x ':' aspect type '.' term          -- body extends right
             | app
    app    ::= unary unary*
    unary  ::= ('p1' | 'p2') unary | atom
    atom   ::= x | numeral | S0 | S1 | P | rand | '(' term ')'
             | '<' term (',' term)+ '>'
             | 'case' '[' type ']' term '{' zero '->' term '|' even '->' term '|' odd '->' term '}'
             | 'rec' '[' type ']' '(' term ';' term ';' term ')'
    type   ::= ptype (('!->' | '~->') type)?
    ptype  ::= tatom ('*' ptype)?
    tatom  ::= 'N' | '(' type ')'
    aspect ::= '!' | '~'

Numerals are decimal or ``0b``-prefixed binary.  ``--`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    MODAL,
    NONMODAL,
    P,
    RAND,
    S0,
    S1,
    Abs,
    App,
    Arrow,
    Aspect,
    Case,
    Const,
    FVar,
    N,
    Nat,
    Num,
    Pair,
    Prod,
    Proj,
    Rec,
    Term,
    Type,
    Var,
)


class ParseError(ValueError):
    """Syntax error with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<arrow>!->|~->)
  | (?P<num>0b[01]+|[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|[\\λ:.()\[\]{}<>,;|!~*])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"case", "rec", "zero", "even", "odd", "rand", "p1", "p2", "S0", "S1", "P", "N"}
_CONSTS: dict[str, Const] = {"S0": S0, "S1": S1, "P": P, "rand": RAND}


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            if text in _KEYWORDS:
                tokens.append(Token(text, text, line, col))
            elif text[0].isupper():
                raise ParseError(f"unknown keyword {text!r}", line, col)
            else:
                tokens.append(Token("ident", text, line, col))
        elif kind in ("num", "arrow"):
            tokens.append(Token(kind, text, line, col))
        elif kind == "op":
            tokens.append(Token("\\" if text == "λ" else text, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str) -> None:
        self.toks = tokenize(src)
        self.i = 0
        self.scope: list[str] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        return self.advance()

    # types

    def type_(self) -> Type:
        left = self.ptype()
        if self.tok.kind == "arrow":
            aspect = MODAL if self.advance().text[0] == "!" else NONMODAL
            return Arrow(aspect, left, self.type_())
        return left

    def ptype(self) -> Type:
        start = self.tok
        left = self.tatom()
        if self.tok.kind == "*":
            self.advance()
            right = self.ptype()
            try:
                return Prod(left, right)
            except ValueError as exc:
                raise self.error(str(exc), start) from None
        return left

    def tatom(self) -> Type:
        if self.tok.kind == "N":
            self.advance()
            return N
        if self.tok.kind == "(":
            self.advance()
            ty = self.type_()
            self.expect(")")
            return ty
        raise self.error(f"expected a type, found {self.tok.text or 'end of input'!r}")

    def aspect(self) -> Aspect:
        if self.tok.kind == "!":
            self.advance()
            return MODAL
        if self.tok.kind == "~":
            self.advance()
            return NONMODAL
        raise self.error("expected an aspect '!' or '~'")

    # terms

    def term(self) -> Term:
        if self.tok.kind == "\\":
            self.advance()
            name = self.expect("ident").text
            self.expect(":")
            aspect = self.aspect()
            annot = self.type_()
            self.expect(".")
            self.scope.append(name)
            try:
                body = self.term()
            finally:
                self.scope.pop()
            return Abs(aspect, annot, body, name)
        return self.application()

    _ATOM_START = {"ident", "num", "S0", "S1", "P", "rand", "(", "<", "case", "rec", "p1", "p2", "\\"}

    def application(self) -> Term:
        t = self.unary()
        while self.tok.kind in self._ATOM_START:
            if self.tok.kind == "\\":
                # trailing lambda argument: f \x:!N. x
                t = App(t, self.term())
                break
            t = App(t, self.unary())
        return t

    def unary(self) -> Term:
        if self.tok.kind in ("p1", "p2"):
            index = int(self.advance().text[1])
            return Proj(index, self.unary())
        return self.atom()

    def atom(self) -> Term:
        tok = self.tok
        kind = tok.kind
        if kind == "ident":
            self.advance()
            for depth, name in enumerate(reversed(self.scope)):
                if name == tok.text:
                    return Var(depth)
            return FVar(tok.text)
        if kind == "num":
            self.advance()
            return Num(int(tok.text, 0))
        if kind in _CONSTS:
            self.advance()
            return _CONSTS[kind]
        if kind == "(":
            self.advance()
            t = self.term()
            self.expect(")")
            return t
        if kind == "<":
            self.advance()
            items = [self.term()]
            while self.tok.kind == ",":
                self.advance()
                items.append(self.term())
            self.expect(">")
            if len(items) < 2:
                raise self.error("a tuple needs at least two components", tok)
            result = items[-1]
            for item in reversed(items[:-1]):
                result = Pair(item, result)
            return result
        if kind == "case":
            return self.case()
        if kind == "rec":
            self.advance()
            self.expect("[")
            annot = self.type_()
            self.expect("]")
            self.expect("(")
            arg = self.term()
            self.expect(";")
            base = self.term()
            self.expect(";")
            step = self.term()
            self.expect(")")
            return Rec(annot, arg, base, step)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def case(self) -> Term:
        self.advance()
        self.expect("[")
        annot = self.type_()
        self.expect("]")
        scrut = self.term()
        self.expect("{")
        branches: dict[str, Term] = {}
        while True:
            label = self.tok
            if label.kind not in ("zero", "even", "odd"):
                raise self.error("expected a branch label 'zero', 'even' or 'odd'")
            if label.kind in branches:
                raise self.error(f"duplicate branch {label.kind!r}")
            self.advance()
            self.expect("->")
            branches[label.kind] = self.term()
            if self.tok.kind == "|":
                self.advance()
                continue
            break
        self.expect("}")
        missing = [b for b in ("zero", "even", "odd") if b not in branches]
        if missing:
            raise self.error(f"missing branch {missing[0]!r}", label)
        return Case(annot, scrut, branches["zero"], branches["even"], branches["odd"])


def parse_term(src: str) -> Term:
    """Parse a term; unbound identifiers become free variables."""
    p = _Parser(src)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_type(src: str) -> Type:
    p = _Parser(src)
    ty = p.type_()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after type")
    return ty


# ------------------------------------------------------------------ printer


def print_type(ty: Type) -> str:
    if isinstance(ty, Nat):
        return "N"
    if isinstance(ty, Prod):
        left = print_type(ty.left)
        if isinstance(ty.left, Prod):
            left = f"({left})"
        return f"{left} * {print_type(ty.right)}"
    if isinstance(ty, Arrow):
        left = print_type(ty.arg)
        if isinstance(ty.arg, Arrow):
            left = f"({left})"
        return f"{left} {ty.aspect.value}-> {print_type(ty.res)}"
    raise TypeError(f"not a type: {ty!r}")


_NAME_RE = re.compile(r"[a-z_][A-Za-z0-9_']*$")


def _base_name(hint: str) -> str:
    if not _NAME_RE.match(hint) or hint in _KEYWORDS:
        return "x"
    return hint.rstrip("0123456789") or "x"


class _Printer:
    def __init__(self, free: frozenset[str]) -> None:
        self.taken = set(free)
        self.names: list[str] = []

    def fresh(self, hint: str) -> str:
        if _NAME_RE.match(hint) and hint not in _KEYWORDS and hint not in self.taken:
            return hint
        base = _base_name(hint)
        i = 1
        while f"{base}{i}" in self.taken or f"{base}{i}" in _KEYWORDS:
            i += 1
        return f"{base}{i}"

    def term(self, t: Term) -> str:
        if isinstance(t, Abs):
            name = self.fresh(t.name)
            self.taken.add(name)
            self.names.append(name)
            try:
                body = self.term(t.body)
            finally:
                self.names.pop()
                self.taken.discard(name)
            return f"\\{name}:{t.aspect.value}{print_type(t.annot)}. {body}"
        return self.app(t)

    def app(self, t: Term) -> str:
        if isinstance(t, App):
            fun = self.app(t.fun)
            if isinstance(t.arg, Abs):
                return f"{fun} ({self.term(t.arg)})"
            return f"{fun} {self.arg(t.arg)}"
        return self.unary(t)

    def arg(self, t: Term) -> str:
        if isinstance(t, (App, Abs, Proj)):
            return f"({self.term(t)})"
        return self.atom(t)

    def unary(self, t: Term) -> str:
        if isinstance(t, Proj):
            return f"p{t.index} {self.arg(t.arg)}"
        return self.atom(t)

    def atom(self, t: Term) -> str:
        if isinstance(t, Var):
            if t.index >= len(self.names):
                return f"#{t.index}"
            return self.names[-1 - t.index]
        if isinstance(t, FVar):
            return t.name
        if isinstance(t, Num):
            return str(t.value)
        if isinstance(t, Const):
            return t.kind.value
        if isinstance(t, Pair):
            return f"<{self.term(t.left)}, {self.term(t.right)}>"
        if isinstance(t, Case):
            return (
                f"case[{print_type(t.annot)}] {self.term(t.scrut)} "
                f"{{ zero -> {self.term(t.zero)} | even -> {self.term(t.even)} | odd -> {self.term(t.odd)} }}"
            )
        if isinstance(t, Rec):
            return f"rec[{print_type(t.annot)}]({self.term(t.arg)}; {self.term(t.base)}; {self.term(t.step)})"
        return f"({self.term(t)})"


def print_term(t: Term) -> str:
    """Render ``t`` so that ``parse_term(print_term(t)) == t``.

    Binder names come from the hints, renamed when they would clash with a
    free variable or an enclosing binder.
    """
    return _Printer(t.free_names).term(t)
