"""Recursive-descent parser for the operator expression DSL.

Grammar (whitespace-insensitive):

    expr    := factor {"*" factor}
    factor  := primary {"'" | "^-1" | "^" nat}
    primary := ident | "I" | "0" | "(" expr ")"
             | "[" expr "," expr ";" expr "," expr "]"

"*" is composition with the left factor applied last, "'" is the adjoint,
"^-1" the inverse.  Powers are desugared into balanced square-and-multiply
composition trees; identity/zero shapes are inferred from context (a bare
"I" or "0" defaults to the base space).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, ShapeMismatch
from .expr import (
    Adjoint,
    Atom,
    Block2,
    Compose,
    Identity,
    Inverse,
    OpExpr,
    Power,
    Zero,
    desugar_powers,
    shape_of,
    shape_of_level,
)

# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    pos: int


_PUNCT = {
    "*": "STAR",
    "'": "PRIME",
    "^": "CARET",
    "-": "MINUS",
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACK",
    "]": "RBRACK",
    ",": "COMMA",
    ";": "SEMI",
    ":": "COLON",
    "<": "LT",
    "=": "EQ",
}


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("IDENT", text[i:j], i))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], i))
            i = j
            continue
        kind = _PUNCT.get(c)
        if kind is None:
            raise ParseError(f"unexpected character {c!r}", i)
        toks.append(Token(kind, c, i))
        i += 1
    toks.append(Token("EOF", "", n))
    return toks


class TokenStream:
    """Cursor over a token list, shared by the expression and set parsers."""

    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._index = 0

    @classmethod
    def of(cls, text: str) -> "TokenStream":
        return cls(tokenize(text))

    def peek(self) -> Token:
        return self._tokens[self._index]

    def advance(self) -> Token:
        tok = self._tokens[self._index]
        if tok.kind != "EOF":
            self._index += 1
        return tok

    def match(self, kind: str) -> Token | None:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            expected = what or kind
            found = tok.text or "end of input"
            raise ParseError(f"expected {expected}, found {found!r}", tok.pos)
        return self.advance()

    def at_end(self) -> bool:
        return self.peek().kind == "EOF"


# ---------------------------------------------------------------------------
# Expression grammar


def parse_expr(text: str) -> OpExpr:
    """Parse a complete expression: shapes inferred, powers desugared."""
    ts = TokenStream.of(text)
    e = parse_embedded_expr(ts)
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return e


def parse_embedded_expr(ts: TokenStream) -> OpExpr:
    """Parse one expression from a shared stream (used inside other grammars)."""
    raw = _parse_chain(ts)
    resolved = _resolve_shapes(raw, None)
    shape_of(resolved)  # validates composition/block shape agreement
    return desugar_powers(resolved)


def _parse_chain(ts: TokenStream) -> OpExpr:
    parts = [_parse_factor(ts)]
    while ts.match("STAR"):
        parts.append(_parse_factor(ts))
    e = parts[-1]
    for p in reversed(parts[:-1]):
        e = Compose(p, e)
    return e


def _parse_factor(ts: TokenStream) -> OpExpr:
    e = _parse_primary(ts)
    while True:
        if ts.match("PRIME"):
            e = Adjoint(e)
            continue
        if ts.peek().kind == "CARET":
            ts.advance()
            if ts.match("MINUS"):
                tok = ts.expect("INT", "1 after '^-'")
                if tok.text != "1":
                    raise ParseError("only ^-1 denotes the inverse", tok.pos)
                e = Inverse(e)
            else:
                tok = ts.expect("INT", "an exponent")
                n = int(tok.text)
                if n < 1:
                    raise ParseError("exponent must be a positive integer", tok.pos)
                e = e if n == 1 else Power(e, n)
            continue
        return e


def _parse_primary(ts: TokenStream) -> OpExpr:
    tok = ts.peek()
    if tok.kind == "IDENT":
        ts.advance()
        if tok.text == "I":
            return Identity(None)
        return Atom(tok.text)
    if tok.kind == "INT":
        if tok.text == "0":
            ts.advance()
            return Zero(None)
        raise ParseError("expected an operator, found a number", tok.pos)
    if tok.kind == "LPAREN":
        ts.advance()
        e = _parse_chain(ts)
        ts.expect("RPAREN", "')'")
        return e
    if tok.kind == "LBRACK":
        ts.advance()
        e11 = _parse_chain(ts)
        ts.expect("COMMA", "',' between block entries")
        e12 = _parse_chain(ts)
        ts.expect("SEMI", "';' between block rows")
        e21 = _parse_chain(ts)
        ts.expect("COMMA", "',' between block entries")
        e22 = _parse_chain(ts)
        ts.expect("RBRACK", "']'")
        return Block2(e11, e12, e21, e22)
    found = tok.text or "end of input"
    raise ParseError(f"expected an operator expression, found {found!r}", tok.pos)


# ---------------------------------------------------------------------------
# Shape inference
#
# Atoms parse at the base space.  "I" and "0" are polymorphic; their level is
# pinned by siblings (block entries share one level, composition factors
# share one level).  Anything still free afterwards takes its minimal
# feasible level: the base space for leaves, one pairing step per block.


def _infer_level(e: OpExpr) -> int | None:
    if isinstance(e, Atom):
        return 0
    if isinstance(e, (Identity, Zero)):
        return None
    if isinstance(e, (Adjoint, Inverse)):
        return _infer_level(e.inner)
    if isinstance(e, Power):
        return _infer_level(e.base)
    if isinstance(e, Compose):
        return _merge_levels(_infer_level(e.after), _infer_level(e.first), e)
    if isinstance(e, Block2):
        entry = None
        for x in e.entries():
            entry = _merge_levels(entry, _infer_level(x), e)
        return None if entry is None else entry + 1
    raise TypeError(f"not an operator expression: {e!r}")


def _merge_levels(a: int | None, b: int | None, where: OpExpr) -> int | None:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise ShapeMismatch(f"conflicting space levels {a} and {b} in {type(where).__name__}")


def _min_level(e: OpExpr) -> int:
    """Smallest level a fully polymorphic subtree can inhabit."""
    if isinstance(e, (Atom, Identity, Zero)):
        return 0
    if isinstance(e, (Adjoint, Inverse)):
        return _min_level(e.inner)
    if isinstance(e, Power):
        return _min_level(e.base)
    if isinstance(e, Compose):
        return max(_min_level(e.after), _min_level(e.first))
    if isinstance(e, Block2):
        return 1 + max(_min_level(x) for x in e.entries())
    raise TypeError(f"not an operator expression: {e!r}")


def _resolve_shapes(e: OpExpr, forced: int | None) -> OpExpr:
    if isinstance(e, Atom):
        if forced not in (None, 0):
            raise ShapeMismatch(f"atom {e.id!r} used at space level {forced}")
        return e
    if isinstance(e, Identity):
        return Identity(shape_of_level(forced if forced is not None else 0))
    if isinstance(e, Zero):
        return Zero(shape_of_level(forced if forced is not None else 0))
    if isinstance(e, Adjoint):
        return Adjoint(_resolve_shapes(e.inner, forced))
    if isinstance(e, Inverse):
        return Inverse(_resolve_shapes(e.inner, forced))
    if isinstance(e, Power):
        return Power(_resolve_shapes(e.base, forced), e.exponent)
    if isinstance(e, Compose):
        level = _merge_levels(_infer_level(e), forced, e)
        if level is None:
            level = _min_level(e)
        return Compose(_resolve_shapes(e.after, level), _resolve_shapes(e.first, level))
    if isinstance(e, Block2):
        level = _merge_levels(_infer_level(e), forced, e)
        if level is None:
            level = _min_level(e)
        if level < 1 + max(_min_level(x) for x in e.entries()):
            raise ShapeMismatch("a block cannot act at this space level")
        return Block2(*(_resolve_shapes(x, level - 1) for x in e.entries()))
    raise TypeError(f"not an operator expression: {e!r}")
