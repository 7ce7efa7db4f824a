"""Normalization of operator expressions into monomial normal form.

The normal form of a scalar expression is a *chain*: a tuple of atom
factors, leftmost applied last.  The normal form of a block expression is a
:class:`MonomialMatrix`: a permutation mapping each output row to the unique
input column it reads, with one chain per row.  The zero operator has its
own degenerate form.

Formal products of monomial matrices are exact: every entry of the product
has at most one nonzero summand, so no sums of unbounded operators arise and
the composition of the block operators literally equals the formal matrix
product.  Block expressions that would require an entry with two nonzero
summands (or a zero row) are rejected as :class:`NonNormalizable`.

Adjoints are eliminated first, by premise-guarded rewriting:

* an adjoint of a self-adjoint expression collapses (atoms by flag;
  ``X^-1`` and diagonal blocks of self-adjoint parts; ``[0, P; P, 0]`` for
  self-adjoint ``P``, which covers the component swap);
* ``(X * Y)' = Y' * X'`` only when one factor is bounded and everywhere
  defined — the identity is false in general for unbounded operators;
* ``[0, A; B, 0]' = [0, B'; A', 0]`` when the entries are densely defined
  and closed;
* a double adjoint collapses on closed densely defined expressions.

Adjoints matching no rule stay symbolic; they normalize only if they sit on
a single atom factor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import NonNormalizable, OutOfRange, ShapeMismatch
from .expr import (
    Adjoint,
    Atom,
    AtomTable,
    BASE,
    Block2,
    Compose,
    Identity,
    Inverse,
    OpExpr,
    Power,
    SpaceShape,
    Zero,
    desugar_powers,
    pretty_print,
    shape_level,
    shape_of_level,
)

_EMPTY_ATOMS = AtomTable()


# ---------------------------------------------------------------------------
# Normal forms


@dataclass(frozen=True, slots=True)
class Factor:
    """One atom reference in a chain, with optional inverse/adjoint markers."""

    atom: str
    inverse: bool = False
    adjoint: bool = False


Chain = tuple[Factor, ...]  # leftmost factor applied last; () is the identity


@dataclass(frozen=True, slots=True)
class MonomialMatrix:
    """Block matrix with exactly one nonzero entry per row and per column.

    ``chains[r]`` is the scalar chain by which output row ``r`` reads input
    column ``col_of_row[r]``.
    """

    dim: int
    col_of_row: tuple[int, ...]
    chains: tuple[Chain, ...]
    shape: SpaceShape

    def __post_init__(self) -> None:
        if self.dim < 1 or self.dim & (self.dim - 1):
            raise ValueError(f"dim must be a power of two, got {self.dim}")
        if sorted(self.col_of_row) != list(range(self.dim)):
            raise ValueError("col_of_row is not a permutation")
        if len(self.chains) != self.dim:
            raise ValueError("one chain per row required")

    def row_of_col(self, c: int) -> int:
        return self.col_of_row.index(c)

    def column_chain(self, c: int) -> Chain:
        """The chain through which input column ``c`` is read."""
        return self.chains[self.row_of_col(c)]


@dataclass(frozen=True, slots=True)
class ZeroBlock:
    """The zero operator (bounded, everywhere defined)."""

    shape: SpaceShape


NormalForm = MonomialMatrix | ZeroBlock | tuple


def nf_shape(nf: NormalForm) -> SpaceShape:
    if isinstance(nf, MonomialMatrix):
        return nf.shape
    if isinstance(nf, ZeroBlock):
        return nf.shape
    return BASE


def scalar_matrix(chain: Chain) -> MonomialMatrix:
    return MonomialMatrix(1, (0,), (chain,), BASE)


def identity_matrix(level: int) -> MonomialMatrix:
    dim = 1 << level
    return MonomialMatrix(
        dim, tuple(range(dim)), ((),) * dim, shape_of_level(level)
    )


# ---------------------------------------------------------------------------
# Back to expressions / rendering


def factor_expr(f: Factor) -> OpExpr:
    e: OpExpr = Atom(f.atom)
    if f.inverse:
        e = Inverse(e)
    if f.adjoint:
        e = Adjoint(e)
    return e


def chain_expr(chain: Chain) -> OpExpr:
    if not chain:
        return Identity(BASE)
    e = factor_expr(chain[-1])
    for f in reversed(chain[:-1]):
        e = Compose(factor_expr(f), e)
    return e


def chain_text(chain: Chain) -> str:
    return pretty_print(chain_expr(chain))


def mono_text(nf: NormalForm) -> str:
    """Canonical text of a normal form, used in derivation judgments."""
    if isinstance(nf, tuple):
        return chain_text(nf)
    if isinstance(nf, ZeroBlock):
        return f"zero({shape_level(nf.shape)})"
    rows = "; ".join(
        f"{r}<-{nf.col_of_row[r]}: {chain_text(nf.chains[r])}" for r in range(nf.dim)
    )
    return f"mono({nf.dim}; {rows})"


# ---------------------------------------------------------------------------
# Derived operator properties (conservative: False means "not derivable")


def is_self_adjoint(e: OpExpr, atoms: AtomTable) -> bool:
    if isinstance(e, Atom):
        return "self_adjoint" in atoms.flags(e.id)
    if isinstance(e, (Identity, Zero)):
        return True
    if isinstance(e, Inverse):
        return is_self_adjoint(e.inner, atoms)
    if isinstance(e, Adjoint):
        return is_self_adjoint(e.inner, atoms)
    if isinstance(e, Block2):
        parts = _diag_parts(e)
        if parts is not None:
            return all(is_self_adjoint(p, atoms) for p in parts)
        parts = _offdiag_parts(e)
        if parts is not None:
            tr, bl = parts
            return tr == bl and is_self_adjoint(tr, atoms)
    return False


def is_densely_defined(e: OpExpr, atoms: AtomTable) -> bool:
    if isinstance(e, Atom):
        return "densely_defined" in atoms.flags(e.id)
    if isinstance(e, (Identity, Zero)):
        return True
    if isinstance(e, Inverse):
        inner = e.inner
        if isinstance(inner, Atom):
            flags = atoms.flags(inner.id)
            # a self-adjoint injective operator has dense range
            return {"self_adjoint", "injective"} <= flags
        return False
    if isinstance(e, Compose):
        return is_everywhere_defined(e.after, atoms) and is_densely_defined(e.first, atoms)
    if isinstance(e, Block2):
        parts = _diag_parts(e) or _offdiag_parts(e)
        if parts is not None:
            return all(is_densely_defined(p, atoms) for p in parts)
    return False


def is_everywhere_bounded(e: OpExpr, atoms: AtomTable) -> bool:
    """Bounded and defined on the whole space."""
    if isinstance(e, Atom):
        return {"bounded", "everywhere_defined"} <= atoms.flags(e.id)
    if isinstance(e, (Identity, Zero)):
        return True
    if isinstance(e, Adjoint):
        return is_everywhere_bounded(e.inner, atoms)
    if isinstance(e, Inverse):
        inner = e.inner
        if isinstance(inner, Atom):
            linked = atoms.inverse_of(inner.id)
            return linked is not None and is_everywhere_bounded(Atom(linked), atoms)
        return False
    if isinstance(e, Compose):
        return is_everywhere_bounded(e.after, atoms) and is_everywhere_bounded(e.first, atoms)
    if isinstance(e, Block2):
        return all(is_everywhere_bounded(x, atoms) for x in e.entries())
    return False


def is_everywhere_defined(e: OpExpr, atoms: AtomTable) -> bool:
    if isinstance(e, Atom):
        return "everywhere_defined" in atoms.flags(e.id)
    if isinstance(e, (Identity, Zero)):
        return True
    if isinstance(e, Inverse):
        inner = e.inner
        if isinstance(inner, Atom):
            linked = atoms.inverse_of(inner.id)
            return linked is not None and is_everywhere_defined(Atom(linked), atoms)
        return False
    if isinstance(e, Compose):
        return is_everywhere_defined(e.after, atoms) and is_everywhere_defined(e.first, atoms)
    if isinstance(e, Block2):
        return all(is_everywhere_defined(x, atoms) for x in e.entries())
    return False


def is_closed(e: OpExpr, atoms: AtomTable) -> bool:
    if isinstance(e, Atom):
        return "closed" in atoms.flags(e.id)
    if isinstance(e, (Identity, Zero)):
        return True
    if is_everywhere_bounded(e, atoms):
        return True
    if isinstance(e, Inverse):
        # the graph of the inverse is the flipped graph
        return is_closed(e.inner, atoms)
    if isinstance(e, Adjoint):
        return is_densely_defined(e.inner, atoms)
    if isinstance(e, Compose):
        return is_closed(e.after, atoms) and is_everywhere_bounded(e.first, atoms)
    if isinstance(e, Block2):
        parts = _diag_parts(e) or _offdiag_parts(e)
        if parts is not None:
            return all(is_closed(p, atoms) for p in parts)
    return False


def _diag_parts(b: Block2) -> tuple[OpExpr, OpExpr] | None:
    if isinstance(b.e12, Zero) and isinstance(b.e21, Zero):
        return (b.e11, b.e22)
    return None


def _offdiag_parts(b: Block2) -> tuple[OpExpr, OpExpr] | None:
    if isinstance(b.e11, Zero) and isinstance(b.e22, Zero):
        return (b.e12, b.e21)
    return None


# ---------------------------------------------------------------------------
# Adjoint elimination


def push_adjoint(e: OpExpr, atoms: AtomTable | None = None) -> OpExpr:
    """Rewrite adjoints inward under the premise-guarded rules.

    Sound but incomplete: adjoints matching no rule are returned unchanged.
    """
    atoms = atoms if atoms is not None else _EMPTY_ATOMS
    if isinstance(e, Adjoint):
        x = push_adjoint(e.inner, atoms)
        return _adjoint_of(x, atoms)
    if isinstance(e, Inverse):
        return Inverse(push_adjoint(e.inner, atoms))
    if isinstance(e, Compose):
        return Compose(push_adjoint(e.after, atoms), push_adjoint(e.first, atoms))
    if isinstance(e, Block2):
        return Block2(*(push_adjoint(x, atoms) for x in e.entries()))
    if isinstance(e, Power):
        return Power(push_adjoint(e.base, atoms), e.exponent)
    return e


def _adjoint_of(x: OpExpr, atoms: AtomTable) -> OpExpr:
    if is_self_adjoint(x, atoms):
        return x
    if isinstance(x, Atom):
        linked = atoms.adjoint_of(x.id)
        if linked is not None:
            return Atom(linked)
        return Adjoint(x)
    if isinstance(x, Adjoint):
        inner = x.inner
        if is_closed(inner, atoms) and is_densely_defined(inner, atoms):
            return inner
        return Adjoint(x)
    if isinstance(x, Compose):
        if is_everywhere_bounded(x.first, atoms) or is_everywhere_bounded(x.after, atoms):
            return Compose(
                _adjoint_of(x.first, atoms),
                _adjoint_of(x.after, atoms),
            )
        return Adjoint(x)
    if isinstance(x, Inverse):
        inner = x.inner
        if is_self_adjoint(inner, atoms):
            return x
        return Adjoint(x)
    if isinstance(x, Block2):
        parts = _offdiag_parts(x)
        if parts is not None:
            tr, bl = parts
            if all(
                is_densely_defined(p, atoms) and is_closed(p, atoms) for p in (tr, bl)
            ):
                return Block2(x.e11, _adjoint_of(bl, atoms), _adjoint_of(tr, atoms), x.e22)
        parts = _diag_parts(x)
        if parts is not None:
            tl, br = parts
            if all(is_densely_defined(p, atoms) for p in (tl, br)):
                return Block2(_adjoint_of(tl, atoms), x.e12, x.e21, _adjoint_of(br, atoms))
        return Adjoint(x)
    return Adjoint(x)


# ---------------------------------------------------------------------------
# Block composition and powers


def compose_blocks(m1: MonomialMatrix, m2: MonomialMatrix) -> MonomialMatrix:
    """Formal product ``m1 * m2`` (``m2`` applied first).

    Row ``r`` of the product reads column ``m2.col_of_row[m1.col_of_row[r]]``
    through ``m1.chains[r]`` applied after ``m2.chains[m1.col_of_row[r]]``.
    Monomiality guarantees every entry is that single product, so dropping
    the zero-factored cross terms is exact.
    """
    if m1.dim != m2.dim or m1.shape != m2.shape:
        raise ShapeMismatch(
            f"cannot compose blocks of dim {m1.dim} and {m2.dim}"
        )
    col = tuple(m2.col_of_row[m1.col_of_row[r]] for r in range(m1.dim))
    chains = tuple(m1.chains[r] + m2.chains[m1.col_of_row[r]] for r in range(m1.dim))
    return MonomialMatrix(m1.dim, col, chains, m1.shape)


def _mul(after: NormalForm, first: NormalForm) -> NormalForm:
    if isinstance(after, ZeroBlock) or isinstance(first, ZeroBlock):
        raise NonNormalizable("composition with the zero operator has no monomial form")
    if isinstance(after, tuple) and isinstance(first, tuple):
        return after + first
    if isinstance(after, MonomialMatrix) and isinstance(first, MonomialMatrix):
        return compose_blocks(after, first)
    raise ShapeMismatch("cannot compose a scalar chain with a block matrix")


def expand_power(e: OpExpr | NormalForm, n: int, atoms: AtomTable | None = None) -> NormalForm:
    """The n-fold formal product, computed by repeated squaring.

    Equals the left fold of ``compose_blocks`` over n copies; intermediate
    squares share structure.
    """
    if n < 1:
        raise OutOfRange("power must be a positive integer")
    nf = e if _is_normal_form(e) else normalize(e, atoms)
    if isinstance(nf, ZeroBlock):
        return nf
    acc: NormalForm | None = None
    square = nf
    k = n
    while k:
        if k & 1:
            acc = square if acc is None else _mul(acc, square)
        k >>= 1
        if k:
            square = _mul(square, square)
    assert acc is not None
    return acc


# ---------------------------------------------------------------------------
# Normalization


def _is_normal_form(x: object) -> bool:
    return isinstance(x, (MonomialMatrix, ZeroBlock)) or (
        isinstance(x, tuple) and all(isinstance(f, Factor) for f in x)
    )


def normalize(e: OpExpr | NormalForm, atoms: AtomTable | None = None) -> NormalForm:
    """Full normal form: adjoints pushed, powers expanded, blocks flattened.

    Idempotent; the result is independent of how equal expressions were
    associated.  Raises :class:`NonNormalizable` where a formal product
    would need an entry with a sum of chains, and for adjoints/inverses of
    compound expressions that no rule eliminates.
    """
    if _is_normal_form(e):
        return e  # type: ignore[return-value]
    atoms = atoms if atoms is not None else _EMPTY_ATOMS
    pushed = push_adjoint(desugar_powers(e), atoms)  # type: ignore[arg-type]
    return _norm(pushed, atoms)


def _norm(e: OpExpr, atoms: AtomTable) -> NormalForm:
    if isinstance(e, Atom):
        return (Factor(e.id),)
    if isinstance(e, Identity):
        level = shape_level(e.shape) if e.shape is not None else 0
        return () if level == 0 else identity_matrix(level)
    if isinstance(e, Zero):
        return ZeroBlock(e.shape if e.shape is not None else BASE)
    if isinstance(e, Inverse):
        return _invert_nf(_norm(e.inner, atoms), atoms)
    if isinstance(e, Adjoint):
        return _adjoint_nf(_norm(e.inner, atoms), atoms, e)
    if isinstance(e, Compose):
        return _mul(_norm(e.after, atoms), _norm(e.first, atoms))
    if isinstance(e, Power):
        return expand_power(_norm(e.base, atoms), e.exponent, atoms)
    if isinstance(e, Block2):
        return _flatten(tuple(_norm(x, atoms) for x in e.entries()))
    raise TypeError(f"not an operator expression: {e!r}")


def _invert_factor(f: Factor, atoms: AtomTable) -> Factor:
    if f.adjoint:
        # (x')^-1 = (x^-1)' : invert underneath, keep the adjoint marker
        return replace(_invert_factor(replace(f, adjoint=False), atoms), adjoint=True)
    if f.inverse:
        return Factor(f.atom)
    linked = atoms.inverse_of(f.atom)
    if linked is not None:
        return Factor(linked)
    return Factor(f.atom, inverse=True)


def _invert_nf(nf: NormalForm, atoms: AtomTable) -> NormalForm:
    if isinstance(nf, tuple):
        if not nf:
            return ()
        if len(nf) == 1:
            return (_invert_factor(nf[0], atoms),)
        raise NonNormalizable("inverse of a composite chain is not normalized")
    raise NonNormalizable("inverse of a block expression is not normalized")


def _adjoint_nf(nf: NormalForm, atoms: AtomTable, original: OpExpr) -> NormalForm:
    # reached only when push_adjoint left the adjoint symbolic
    if isinstance(nf, tuple):
        if not nf:
            return ()
        if len(nf) == 1:
            return (_adjoint_factor(nf[0], atoms),)
    raise NonNormalizable(
        f"adjoint not eliminable (no rule premise holds): {pretty_print(original)}"
    )


def _adjoint_factor(f: Factor, atoms: AtomTable) -> Factor:
    flags = atoms.flags(f.atom)
    if f.adjoint:
        # a double adjoint collapses only on closed densely defined factors
        if not f.inverse and {"closed", "densely_defined"} <= flags:
            return replace(f, adjoint=False)
        if f.inverse and {"self_adjoint", "injective"} <= flags:
            return replace(f, adjoint=False)
        raise NonNormalizable(f"double adjoint of {f.atom!r} does not collapse")
    if "self_adjoint" in flags:
        return f
    if not f.inverse:
        linked = atoms.adjoint_of(f.atom)
        if linked is not None:
            return Factor(linked)
    return replace(f, adjoint=True)


def _flatten(entries: tuple[NormalForm, NormalForm, NormalForm, NormalForm]) -> MonomialMatrix:
    mats: list[MonomialMatrix | None] = []
    dims = set()
    for ent in entries:
        if isinstance(ent, ZeroBlock):
            mats.append(None)
            dims.add(1 << shape_level(ent.shape))
        elif isinstance(ent, tuple):
            mats.append(scalar_matrix(ent))
            dims.add(1)
        else:
            mats.append(ent)
            dims.add(ent.dim)
    if len(dims) != 1:
        raise ShapeMismatch(f"block entries of mixed dims {sorted(dims)}")
    d = dims.pop()
    col_of_row: list[int] = []
    chains: list[Chain] = []
    for r in range(2 * d):
        block_row, r_local = divmod(r, d)
        found: list[tuple[int, Chain]] = []
        for block_col in (0, 1):
            ent = mats[2 * block_row + block_col]
            if ent is None:
                continue
            found.append((block_col * d + ent.col_of_row[r_local], ent.chains[r_local]))
        if len(found) != 1:
            raise NonNormalizable(
                "row of a block product needs a sum of chains"
                if len(found) > 1
                else "block has a zero row, no monomial form"
            )
        col_of_row.append(found[0][0])
        chains.append(found[0][1])
    if sorted(col_of_row) != list(range(2 * d)):
        raise NonNormalizable("block reads some input column twice, no monomial form")
    level = (2 * d).bit_length() - 1
    return MonomialMatrix(2 * d, tuple(col_of_row), tuple(chains), shape_of_level(level))
