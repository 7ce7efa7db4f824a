"""Operator expressions, the nested spaces they act on, and atom declarations.

An atom is a named operator with declared properties (flags).  Expressions
are finite trees built from atoms, identity and zero operators, adjoints,
inverses, compositions and 2x2 operator blocks.  Compositions follow the
usual analyst convention: in ``Compose(after, first)`` (printed
``after * first``) the right factor is applied first.

Spaces are balanced binary trees: the base space, or a pair of two equal
copies.  Every block construction here doubles a space, so a shape is
determined by its pairing depth.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DuplicateId, InconsistentFlags, OutOfRange, ShapeMismatch

# ---------------------------------------------------------------------------
# Spaces

MAX_PAIR_DEPTH = 16


@dataclass(frozen=True, slots=True)
class Base:
    """The base Hilbert space (scalar operators act here)."""

    def __repr__(self) -> str:
        return "Base"


@dataclass(frozen=True, slots=True)
class Pair:
    """Direct sum of two equal copies of a smaller space."""

    left: "SpaceShape"
    right: "SpaceShape"

    def __post_init__(self) -> None:
        if self.left != self.right:
            raise ShapeMismatch("a Pair must join two equal halves")
        if shape_level(self.left) + 1 > MAX_PAIR_DEPTH:
            raise ShapeMismatch(f"pair depth exceeds {MAX_PAIR_DEPTH}")

    def __repr__(self) -> str:
        return f"Pair({self.left!r})"


SpaceShape = Base | Pair

BASE = Base()


def shape_level(s: SpaceShape) -> int:
    """Pairing depth: 0 for the base space, +1 per doubling."""
    level = 0
    while isinstance(s, Pair):
        s = s.left
        level += 1
    return level


def shape_of_level(level: int) -> SpaceShape:
    if level < 0 or level > MAX_PAIR_DEPTH:
        raise OutOfRange(f"shape level {level} out of range 0..{MAX_PAIR_DEPTH}")
    s: SpaceShape = BASE
    for _ in range(level):
        s = Pair(s, s)
    return s


def shape_dim(s: SpaceShape) -> int:
    """Number of base components of the space."""
    return 1 << shape_level(s)


def doubled(s: SpaceShape) -> SpaceShape:
    return Pair(s, s)


# ---------------------------------------------------------------------------
# Atom declarations

FLAGS = frozenset(
    {
        "self_adjoint",
        "positive",
        "injective",
        "bounded",
        "everywhere_defined",
        "densely_defined",
        "closed",
        "unbounded",
    }
)

# flag -> flags it implies; declarations must be closed under these
_IMPLICATIONS = {
    "everywhere_defined": frozenset({"densely_defined"}),
    "self_adjoint": frozenset({"closed", "densely_defined"}),
}


def complete_flags(flags: frozenset[str] | set[str]) -> frozenset[str]:
    """Close a flag set under the implication rules."""
    out = set(flags)
    changed = True
    while changed:
        changed = False
        for f, implied in _IMPLICATIONS.items():
            if f in out and not implied <= out:
                out |= implied
                changed = True
    return frozenset(out)


@dataclass(frozen=True, slots=True)
class AtomDecl:
    """A named operator with declared properties.

    The flag set must be explicitly closed under the implications
    (everywhere_defined => densely_defined, self_adjoint => closed and
    densely_defined) and must not assert bounded together with unbounded.
    Use :meth:`make` to build a declaration from a bare flag set; the raw
    constructor rejects non-closed sets.
    """

    id: str
    flags: frozenset[str]
    inverse_of: str | None = None
    adjoint_of: str | None = None
    shape: SpaceShape = BASE

    def __post_init__(self) -> None:
        unknown = self.flags - FLAGS
        if unknown:
            raise InconsistentFlags(f"unknown flags {sorted(unknown)} on atom {self.id!r}")
        if "bounded" in self.flags and "unbounded" in self.flags:
            raise InconsistentFlags(f"atom {self.id!r} declared both bounded and unbounded")
        for f, implied in _IMPLICATIONS.items():
            if f in self.flags and not implied <= self.flags:
                missing = sorted(implied - self.flags)
                raise InconsistentFlags(
                    f"atom {self.id!r}: flag {f!r} requires {missing}"
                )
        if self.inverse_of is not None and "injective" not in self.flags:
            raise InconsistentFlags(
                f"atom {self.id!r} is an inverse but is not flagged injective"
            )

    @classmethod
    def make(
        cls,
        id: str,
        flags: set[str] | frozenset[str],
        inverse_of: str | None = None,
        adjoint_of: str | None = None,
        shape: SpaceShape = BASE,
    ) -> "AtomDecl":
        """Build a declaration, closing the flag set under the implications."""
        return cls(id, complete_flags(flags), inverse_of, adjoint_of, shape)

    def has(self, flag: str) -> bool:
        return flag in self.flags


class AtomTable:
    """Registry of declared atoms.  Atoms are immutable once declared."""

    def __init__(self) -> None:
        self._atoms: dict[str, AtomDecl] = {}

    def declare(self, decl: AtomDecl) -> AtomDecl:
        if decl.id in self._atoms:
            raise DuplicateId(f"atom {decl.id!r} already declared")
        if decl.inverse_of is not None:
            self._check_partner(decl.inverse_of, decl.id)
        self._atoms[decl.id] = decl
        return decl

    def _check_partner(self, partner_id: str, of: str) -> None:
        partner = self._atoms.get(partner_id)
        if partner is not None and not partner.has("injective"):
            raise InconsistentFlags(
                f"atom {partner_id!r} linked as inverse of {of!r} but not injective"
            )

    def link_inverse(self, a: str, b: str) -> None:
        """Record that a and b are mutual inverses.  Both must be injective."""
        for x in (a, b):
            if x not in self._atoms:
                raise DuplicateId(f"cannot link undeclared atom {x!r}")
            if not self._atoms[x].has("injective"):
                raise InconsistentFlags(f"atom {x!r} linked as an inverse but not injective")
        self._atoms[a] = replace(self._atoms[a], inverse_of=b)
        self._atoms[b] = replace(self._atoms[b], inverse_of=a)

    def get(self, id: str) -> AtomDecl | None:
        return self._atoms.get(id)

    def __contains__(self, id: str) -> bool:
        return id in self._atoms

    def __iter__(self):
        return iter(self._atoms.values())

    def ids(self) -> list[str]:
        return list(self._atoms)

    def inverse_of(self, id: str) -> str | None:
        decl = self._atoms.get(id)
        return decl.inverse_of if decl else None

    def adjoint_of(self, id: str) -> str | None:
        decl = self._atoms.get(id)
        return decl.adjoint_of if decl else None

    def flags(self, id: str) -> frozenset[str]:
        decl = self._atoms.get(id)
        return decl.flags if decl else frozenset()

    def shape(self, id: str) -> SpaceShape:
        decl = self._atoms.get(id)
        return decl.shape if decl else BASE


def declare_atom(table: AtomTable, decl: AtomDecl) -> AtomDecl:
    """Register ``decl`` in ``table`` and return it."""
    return table.declare(decl)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True, slots=True)
class Atom:
    id: str


@dataclass(frozen=True, slots=True)
class Identity:
    shape: SpaceShape | None = BASE


@dataclass(frozen=True, slots=True)
class Zero:
    shape: SpaceShape | None = BASE


@dataclass(frozen=True, slots=True)
class Adjoint:
    inner: "OpExpr"


@dataclass(frozen=True, slots=True)
class Inverse:
    inner: "OpExpr"


@dataclass(frozen=True, slots=True)
class Compose:
    """``after * first``: the right factor is applied first."""

    after: "OpExpr"
    first: "OpExpr"


@dataclass(frozen=True, slots=True)
class Block2:
    """2x2 operator matrix on the doubled space, row-major entries."""

    e11: "OpExpr"
    e12: "OpExpr"
    e21: "OpExpr"
    e22: "OpExpr"

    def entries(self) -> tuple["OpExpr", "OpExpr", "OpExpr", "OpExpr"]:
        return (self.e11, self.e12, self.e21, self.e22)


@dataclass(frozen=True, slots=True)
class Power:
    """Syntactic sugar, eliminated by :func:`desugar_powers`."""

    base: "OpExpr"
    exponent: int

    def __post_init__(self) -> None:
        if self.exponent < 1:
            raise OutOfRange("powers must have a positive exponent")


OpExpr = Atom | Identity | Zero | Adjoint | Inverse | Compose | Block2 | Power


# ---------------------------------------------------------------------------
# Shape computation


def shape_of(e: OpExpr, atoms: AtomTable | None = None) -> SpaceShape:
    """The space an expression acts on.  Raises ShapeMismatch if ill-formed."""
    if isinstance(e, Atom):
        return atoms.shape(e.id) if atoms is not None else BASE
    if isinstance(e, (Identity, Zero)):
        if e.shape is None:
            raise ShapeMismatch("identity/zero with unresolved shape")
        return e.shape
    if isinstance(e, (Adjoint, Inverse)):
        return shape_of(e.inner, atoms)
    if isinstance(e, Power):
        return shape_of(e.base, atoms)
    if isinstance(e, Compose):
        sa = shape_of(e.after, atoms)
        sf = shape_of(e.first, atoms)
        if sa != sf:
            raise ShapeMismatch(
                f"composition of operators on different spaces "
                f"(levels {shape_level(sa)} and {shape_level(sf)})"
            )
        return sa
    if isinstance(e, Block2):
        shapes = [shape_of(x, atoms) for x in e.entries()]
        if len(set(map(shape_level, shapes))) != 1:
            raise ShapeMismatch("block entries act on different spaces")
        return Pair(shapes[0], shapes[0])
    raise TypeError(f"not an operator expression: {e!r}")


# ---------------------------------------------------------------------------
# Printing

# Grammar (also used by the parser):
#   expr    := factor {"*" factor}
#   factor  := primary {"'" | "^-1" | "^" nat}
#   primary := ident | "I" | "0" | "(" expr ")" | "[" expr "," expr ";" expr "," expr "]"
# "*" composes with the left factor applied last; "'" is the adjoint.


def pretty_print(e: OpExpr) -> str:
    """Render an expression in the surface syntax.

    Parsing the result reproduces the expression structurally, provided
    identity/zero shapes are recoverable from context (a bare "I" or "0"
    prints the same at every level).
    """
    if isinstance(e, Compose):
        return f"{_factor_str(e.after)} * {_tail_str(e.first)}"
    return _factor_str(e)


def _tail_str(e: OpExpr) -> str:
    # right spine of a composition chain stays unparenthesized
    if isinstance(e, Compose):
        return pretty_print(e)
    return _factor_str(e)


def _factor_str(e: OpExpr) -> str:
    if isinstance(e, Atom):
        return e.id
    if isinstance(e, Identity):
        return "I"
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, Adjoint):
        return _factor_str(e.inner) + "'"
    if isinstance(e, Inverse):
        return _factor_str(e.inner) + "^-1"
    if isinstance(e, Power):
        return f"{_factor_str(e.base)}^{e.exponent}"
    if isinstance(e, Block2):
        a, b, c, d = (pretty_print(x) for x in e.entries())
        return f"[{a}, {b}; {c}, {d}]"
    if isinstance(e, Compose):
        return f"({pretty_print(e)})"
    raise TypeError(f"not an operator expression: {e!r}")


# ---------------------------------------------------------------------------
# Power desugaring


def desugar_powers(e: OpExpr) -> OpExpr:
    """Replace every Power node by a balanced square-and-multiply tree.

    Repeated squares share structure: ``e^4`` becomes ``Compose(h, h)``
    with a single shared ``h = Compose(e, e)``.
    """
    if isinstance(e, (Atom, Identity, Zero)):
        return e
    if isinstance(e, Adjoint):
        return Adjoint(desugar_powers(e.inner))
    if isinstance(e, Inverse):
        return Inverse(desugar_powers(e.inner))
    if isinstance(e, Compose):
        return Compose(desugar_powers(e.after), desugar_powers(e.first))
    if isinstance(e, Block2):
        return Block2(*(desugar_powers(x) for x in e.entries()))
    if isinstance(e, Power):
        return _power_tree(desugar_powers(e.base), e.exponent)
    raise TypeError(f"not an operator expression: {e!r}")


def _power_tree(base: OpExpr, n: int) -> OpExpr:
    if n == 1:
        return base
    half = _power_tree(base, n // 2)
    square = Compose(half, half)
    if n % 2 == 0:
        return square
    return Compose(square, base)


# ---------------------------------------------------------------------------
# Block builders


def offdiag(top_right: OpExpr, bottom_left: OpExpr, atoms: AtomTable | None = None) -> Block2:
    """``[0, X; Y, 0]`` on the doubled space."""
    s = shape_of(top_right, atoms)
    if shape_of(bottom_left, atoms) != s:
        raise ShapeMismatch("off-diagonal entries act on different spaces")
    return Block2(Zero(s), top_right, bottom_left, Zero(s))


def diag(top_left: OpExpr, bottom_right: OpExpr, atoms: AtomTable | None = None) -> Block2:
    """``[X, 0; 0, Y]`` on the doubled space."""
    s = shape_of(top_left, atoms)
    if shape_of(bottom_right, atoms) != s:
        raise ShapeMismatch("diagonal entries act on different spaces")
    return Block2(top_left, Zero(s), Zero(s), bottom_right)


def swap(s: SpaceShape) -> Block2:
    """The component swap ``[0, I; I, 0]`` on the doubled space.

    A self-adjoint unitary: it squares to the identity.
    """
    return Block2(Zero(s), Identity(s), Identity(s), Zero(s))
