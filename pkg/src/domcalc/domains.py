"""Symbolic domains, fact bases, rewrite rules, verdicts and derivations.

The central objects:

* :class:`DomainSet` values describe domains symbolically: the whole space,
  the trivial subspace {0}, an atom's domain, ranges, kernels, restricted
  preimages ``pre(T, S) = {x in dom(T) : Tx in S}``, intersections and
  direct sums.
* A :class:`FactBase` holds atom declarations plus axioms keyed by
  normalized expressions (domain equalities, trivial intersections, range
  facts, density marks).
* :func:`domain_of` computes a raw structural domain; :func:`simplify_domain`
  rewrites it to a fixpoint against the fact base; :func:`verdict_of`
  normalizes an expression, searches all regroupings of composition chains,
  and returns the most specific verdict in the lattice
  ``Unknown < {Trivial, NonTrivial < Dense}``.

Every answer carries a :class:`Derivation`: a finite tree of named rule
applications whose leaves are axioms, flag lookups, or premise-free
structural rules.  Derivations are replayable by the independent checker in
:mod:`domcalc.checker`.

Simplification rules (one rewrite per derivation step):

    S-INT-TRIV    meet(S, trivial) -> trivial           (either side)
    S-INT-WHOLE   meet(whole, S) -> S                   (either side)
    S-SUM-TRIV    oplus(trivial, trivial) -> trivial
    FACT-MATCH    meet(dom(a), dom(b)) -> trivial       (cited axiom)
                  pre(e, whole) -> rhs                  (cited dom axiom on e)
    RANGE-FACT    ran(a^-1) -> dom(a); ran(a) -> dom(b) (cited range axiom)
    S-PRE-TRIV    pre(e, trivial) -> ker(e)
    S-PRE-WHOLE   pre(e, whole) -> dom-of(e)            (premise: domain node)
    S-PRE-RANGE   pre(e, S) -> ker(e)                   (premise: meet(ran(e), S)
                                                         simplifies to trivial)
    S-PRE-COMP    pre(X * Y, S) -> pre(Y, pre(X, S))
    S-KER-INJ     ker(e) -> trivial                     (premise: injectivity)

The rules are sound and deliberately incomplete; ``Unknown`` is an
acceptable verdict.  If two regroupings of one chain ever produce
*conflicting* definite verdicts the engine raises
:class:`ContradictionDetected` — that never happens unless a rule is wrong.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import (
    ConflictingAxiom,
    ContradictionDetected,
    NonNormalizable,
    ParseError,
)
from .expr import (
    Adjoint,
    Atom,
    AtomDecl,
    AtomTable,
    Block2,
    Compose,
    Identity,
    Inverse,
    OpExpr,
    Power,
    Zero,
    desugar_powers,
    pretty_print,
)
from .normalize import (
    Chain,
    Factor,
    MonomialMatrix,
    NormalForm,
    ZeroBlock,
    chain_expr,
    chain_text,
    factor_expr,
    mono_text,
    normalize,
)
from .parser import TokenStream, parse_embedded_expr

# ---------------------------------------------------------------------------
# Domain sets


@dataclass(frozen=True, slots=True)
class Whole:
    pass


@dataclass(frozen=True, slots=True)
class TrivialSet:
    pass


@dataclass(frozen=True, slots=True)
class DomAtom:
    atom: str


@dataclass(frozen=True, slots=True)
class RangeSet:
    op: OpExpr


@dataclass(frozen=True, slots=True)
class KernelSet:
    op: OpExpr


@dataclass(frozen=True, slots=True)
class PreimageSet:
    """``{x in dom(op) : op x in inside}`` — the full preimage restricted
    to the operator's domain."""

    op: OpExpr
    inside: "DomainSet"


@dataclass(frozen=True, slots=True)
class Meet:
    left: "DomainSet"
    right: "DomainSet"


@dataclass(frozen=True, slots=True)
class DirectSum:
    left: "DomainSet"
    right: "DomainSet"


DomainSet = Whole | TrivialSet | DomAtom | RangeSet | KernelSet | PreimageSet | Meet | DirectSum

WHOLE = Whole()
TRIVIAL = TrivialSet()


def set_text(s: DomainSet) -> str:
    if isinstance(s, Whole):
        return "whole"
    if isinstance(s, TrivialSet):
        return "trivial"
    if isinstance(s, DomAtom):
        return f"dom({s.atom})"
    if isinstance(s, RangeSet):
        return f"ran({pretty_print(s.op)})"
    if isinstance(s, KernelSet):
        return f"ker({pretty_print(s.op)})"
    if isinstance(s, PreimageSet):
        return f"pre({pretty_print(s.op)}, {set_text(s.inside)})"
    if isinstance(s, Meet):
        return f"meet({set_text(s.left)}, {set_text(s.right)})"
    if isinstance(s, DirectSum):
        return f"oplus({set_text(s.left)}, {set_text(s.right)})"
    raise TypeError(f"not a domain set: {s!r}")


def parse_set(text: str) -> DomainSet:
    ts = TokenStream.of(text)
    s = parse_set_embedded(ts)
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return s


def parse_set_embedded(ts: TokenStream) -> DomainSet:
    tok = ts.expect("IDENT", "a domain-set constructor")
    name = tok.text
    if name == "whole":
        return WHOLE
    if name == "trivial":
        return TRIVIAL
    if name in ("dom", "ran", "ker"):
        ts.expect("LPAREN", "'('")
        op = parse_embedded_expr(ts)
        ts.expect("RPAREN", "')'")
        if name == "dom":
            if not isinstance(op, Atom):
                raise ParseError("dom(...) in a set position takes an atom", tok.pos)
            return DomAtom(op.id)
        return RangeSet(op) if name == "ran" else KernelSet(op)
    if name == "pre":
        ts.expect("LPAREN", "'('")
        op = parse_embedded_expr(ts)
        ts.expect("COMMA", "','")
        inside = parse_set_embedded(ts)
        ts.expect("RPAREN", "')'")
        return PreimageSet(op, inside)
    if name in ("meet", "oplus"):
        ts.expect("LPAREN", "'('")
        left = parse_set_embedded(ts)
        ts.expect("COMMA", "','")
        right = parse_set_embedded(ts)
        ts.expect("RPAREN", "')'")
        return Meet(left, right) if name == "meet" else DirectSum(left, right)
    raise ParseError(f"unknown set constructor {name!r}", tok.pos)


def _set_size(s: DomainSet) -> int:
    if isinstance(s, (Whole, TrivialSet, DomAtom)):
        return 1
    if isinstance(s, (RangeSet, KernelSet)):
        return 2
    if isinstance(s, PreimageSet):
        return 2 + _set_size(s.inside)
    if isinstance(s, (Meet, DirectSum)):
        return 1 + _set_size(s.left) + _set_size(s.right)
    raise TypeError(f"not a domain set: {s!r}")


# ---------------------------------------------------------------------------
# Verdicts


class Verdict(Enum):
    TRIVIAL = "Trivial"
    NONTRIVIAL = "NonTrivial"
    DENSE = "Dense"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value

    @property
    def is_definite(self) -> bool:
        return self is not Verdict.UNKNOWN


def verdict_conflicts(a: Verdict, b: Verdict) -> bool:
    """Definite disagreement: {0} versus a nonzero (or dense) subspace."""
    pair = {a, b}
    return Verdict.TRIVIAL in pair and (
        Verdict.NONTRIVIAL in pair or Verdict.DENSE in pair
    )


def verdict_satisfies(derived: Verdict, expected: Verdict) -> bool:
    """Dense answers a NonTrivial expectation (on nonzero spaces)."""
    if derived is expected:
        return True
    return expected is Verdict.NONTRIVIAL and derived is Verdict.DENSE


def sum_verdict(a: Verdict, b: Verdict) -> Verdict:
    """Verdict of a direct sum from component verdicts."""
    if a is Verdict.DENSE and b is Verdict.DENSE:
        return Verdict.DENSE
    if a is Verdict.TRIVIAL and b is Verdict.TRIVIAL:
        return Verdict.TRIVIAL
    definite_nonzero = {Verdict.DENSE, Verdict.NONTRIVIAL}
    if a in definite_nonzero or b in definite_nonzero:
        return Verdict.NONTRIVIAL
    return Verdict.UNKNOWN


_VERDICT_RANK = {
    Verdict.TRIVIAL: 3,
    Verdict.DENSE: 3,
    Verdict.NONTRIVIAL: 2,
    Verdict.UNKNOWN: 1,
}


# ---------------------------------------------------------------------------
# Derivations


@dataclass(frozen=True)
class Derivation:
    """One node of a replayable inference tree.

    ``conclusion`` is a canonical judgment string; ``axioms`` are the
    canonical texts of fact-base axioms the step cites.
    """

    rule: str
    conclusion: str
    premises: tuple["Derivation", ...] = ()
    axioms: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "conclusion": self.conclusion,
            "premises": [p.to_dict() for p in self.premises],
            "axioms": list(self.axioms),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_markdown(self) -> str:
        lines: list[str] = []

        def walk(node: "Derivation", depth: int) -> None:
            suffix = f" (axioms: {'; '.join(node.axioms)})" if node.axioms else ""
            lines.append(f"{'  ' * depth}- [{node.rule}] {node.conclusion}{suffix}")
            for p in node.premises:
                walk(p, depth + 1)

        walk(self, 0)
        return "\n".join(lines) + "\n"

    def count(self) -> int:
        return 1 + sum(p.count() for p in self.premises)


def _flag_node(atom: str, flag: str) -> Derivation:
    return Derivation("FLAG", f"flag({atom}, {flag})")


# ---------------------------------------------------------------------------
# Fact base


class FactBase:
    """Atom declarations plus axioms keyed by normalized expressions."""

    def __init__(self, atoms: AtomTable | None = None):
        self.atoms = atoms if atoms is not None else AtomTable()
        self.dom_axioms: dict[Chain, tuple[DomainSet, str]] = {}
        self.meet_axioms: dict[frozenset[str], str] = {}
        self.range_axioms: dict[str, tuple[str, str]] = {}
        self.dense_marks: dict[str, str] = {}
        self.provenance: dict[str, str] = {}

    # -- canonical axiom texts -------------------------------------------

    @staticmethod
    def dom_axiom_text(chain: Chain, rhs: DomainSet) -> str:
        return f"dom({chain_text(chain)}) = {set_text(rhs)}"

    @staticmethod
    def meet_axiom_text(a: str, b: str) -> str:
        x, y = sorted((a, b))
        return f"meet dom({x}) dom({y}) = trivial"

    @staticmethod
    def range_axiom_text(a: str, target: str) -> str:
        return f"range {a} = dom({target})"

    @staticmethod
    def dense_mark_text(a: str) -> str:
        return f"dense dom({a})"

    # -- population -------------------------------------------------------

    def add_dom_axiom(self, chain: Chain, rhs: DomainSet, note: str) -> str:
        text = self.dom_axiom_text(chain, rhs)
        existing = self.dom_axioms.get(chain)
        if existing is not None and existing[0] != rhs:
            raise ConflictingAxiom(
                f"dom({chain_text(chain)}) asserted as both "
                f"{set_text(existing[0])} and {set_text(rhs)}"
            )
        self.dom_axioms[chain] = (rhs, text)
        self.provenance.setdefault(text, note)
        return text

    def add_meet_axiom(self, a: str, b: str, note: str) -> str:
        text = self.meet_axiom_text(a, b)
        self.meet_axioms[frozenset((a, b))] = text
        self.provenance.setdefault(text, note)
        return text

    def add_range_axiom(self, a: str, target: str, note: str) -> str:
        text = self.range_axiom_text(a, target)
        existing = self.range_axioms.get(a)
        if existing is not None and existing[0] != target:
            raise ConflictingAxiom(
                f"range of {a} asserted as both dom({existing[0]}) and dom({target})"
            )
        self.range_axioms[a] = (target, text)
        self.provenance.setdefault(text, note)
        return text

    def add_dense_mark(self, a: str, note: str) -> str:
        text = self.dense_mark_text(a)
        self.dense_marks[a] = text
        self.provenance.setdefault(text, note)
        return text

    # -- queries ----------------------------------------------------------

    def axiom_texts(self) -> frozenset[str]:
        texts = {t for _, t in self.dom_axioms.values()}
        texts.update(self.meet_axioms.values())
        texts.update(t for _, t in self.range_axioms.values())
        texts.update(self.dense_marks.values())
        return frozenset(texts)

    def axiom_count(self) -> int:
        return len(self.dom_axioms) + len(self.meet_axioms) + len(self.range_axioms) + len(
            self.dense_marks
        )

    def has_flag(self, atom: str, flag: str) -> bool:
        return flag in self.atoms.flags(atom)


def load_facts(text: str, provenance: str = "<facts>") -> FactBase:
    """Parse the line-oriented facts format.

    Lines (``#`` starts a comment)::

        atom <id> { flag, flag, ... }
        link inverse <id> <id>
        axiom dom(<expr>) = trivial | dom(<atom>)
        axiom meet dom(<atom>) dom(<atom>) = trivial
        axiom dense dom(<atom>)
        axiom range <atom> = dom(<atom>)

    Atoms and links are processed before axioms so axiom keys normalize
    against the declared links.  Flag sets are closed under the implication
    rules.  An inverse link records the range facts ``range a = dom(b)`` in
    both directions.
    """
    facts = FactBase()
    lines = text.splitlines()

    def stripped(line: str) -> str:
        return line.split("#", 1)[0].strip()

    # pass 1: atoms, then links
    for lineno, raw in enumerate(lines, 1):
        line = stripped(raw)
        if not line or line.startswith(("axiom ", "link ")):
            continue
        if line.startswith("atom "):
            _load_atom_line(facts, line, lineno)
        else:
            raise ParseError(f"unrecognized facts line: {line!r}", lineno)
    for lineno, raw in enumerate(lines, 1):
        line = stripped(raw)
        if line.startswith("link "):
            _load_link_line(facts, line, lineno, provenance)
    # pass 2: axioms
    for lineno, raw in enumerate(lines, 1):
        line = stripped(raw)
        if line.startswith("axiom "):
            _load_axiom_line(facts, line, lineno, provenance)
    return facts


def _load_atom_line(facts: FactBase, line: str, lineno: int) -> None:
    body = line[len("atom "):].strip()
    if "{" not in body or not body.endswith("}"):
        raise ParseError("atom line must be 'atom <id> { flags }'", lineno)
    name, braces = body.split("{", 1)
    name = name.strip()
    if not name.isidentifier():
        raise ParseError(f"bad atom id {name!r}", lineno)
    flag_text = braces[:-1].strip()
    flags = {f.strip() for f in flag_text.split(",") if f.strip()} if flag_text else set()
    facts.atoms.declare(AtomDecl.make(name, flags))


def _load_link_line(facts: FactBase, line: str, lineno: int, provenance: str) -> None:
    parts = line.split()
    if len(parts) != 4 or parts[1] != "inverse":
        raise ParseError("link line must be 'link inverse <id> <id>'", lineno)
    a, b = parts[2], parts[3]
    for x in (a, b):
        if x not in facts.atoms:
            raise ParseError(f"link references undeclared atom {x!r}", lineno)
    facts.atoms.link_inverse(a, b)
    note = f"{provenance}:{lineno} (implied by inverse link)"
    facts.add_range_axiom(a, b, note)
    facts.add_range_axiom(b, a, note)


def _require_atom(facts: FactBase, name: str, lineno: int) -> str:
    if name not in facts.atoms:
        raise ParseError(f"axiom references undeclared atom {name!r}", lineno)
    return name


def _load_axiom_line(facts: FactBase, line: str, lineno: int, provenance: str) -> None:
    body = line[len("axiom "):].strip()
    note = f"{provenance}:{lineno}"
    try:
        if body.startswith("dom("):
            lhs_text, _, rhs_text = body.partition("=")
            if not rhs_text:
                raise ParseError("dom axiom needs '= trivial' or '= dom(<atom>)'", lineno)
            expr = _parse_call_arg(lhs_text.strip(), "dom", lineno)
            nf = normalize(expr, facts.atoms)
            if not isinstance(nf, tuple):
                raise ParseError("dom axioms take scalar compositions", lineno)
            rhs = _parse_axiom_rhs(rhs_text.strip(), facts, lineno)
            facts.add_dom_axiom(nf, rhs, note)
            return
        if body.startswith("meet "):
            rest, _, rhs_text = body[len("meet "):].partition("=")
            if rhs_text.strip() != "trivial":
                raise ParseError("meet axioms must end with '= trivial'", lineno)
            doms = [p.strip() for p in rest.strip().split(")") if p.strip()]
            names = []
            for p in doms:
                if not p.startswith("dom("):
                    raise ParseError("meet axiom takes two dom(<atom>) terms", lineno)
                names.append(_require_atom(facts, p[len("dom("):].strip(), lineno))
            if len(names) != 2:
                raise ParseError("meet axiom takes exactly two dom(<atom>) terms", lineno)
            facts.add_meet_axiom(names[0], names[1], note)
            return
        if body.startswith("dense "):
            arg = body[len("dense "):].strip()
            expr = _parse_call_arg(arg, "dom", lineno)
            if not isinstance(expr, Atom):
                raise ParseError("dense marks apply to dom(<atom>)", lineno)
            facts.add_dense_mark(_require_atom(facts, expr.id, lineno), note)
            return
        if body.startswith("range "):
            rest, _, rhs_text = body[len("range "):].partition("=")
            a = _require_atom(facts, rest.strip(), lineno)
            target = _parse_call_arg(rhs_text.strip(), "dom", lineno)
            if not isinstance(target, Atom):
                raise ParseError("range axioms end with '= dom(<atom>)'", lineno)
            facts.add_range_axiom(a, _require_atom(facts, target.id, lineno), note)
            return
    except ParseError:
        raise
    except NonNormalizable as exc:
        raise ParseError(f"axiom expression not normalizable: {exc}", lineno) from exc
    raise ParseError(f"unrecognized axiom form: {body!r}", lineno)


def _parse_call_arg(text: str, head: str, lineno: int) -> OpExpr:
    if not text.startswith(head + "(") or not text.endswith(")"):
        raise ParseError(f"expected {head}(...), found {text!r}", lineno)
    try:
        return parse_embedded_expr_text(text[len(head) + 1 : -1])
    except ParseError as exc:
        raise ParseError(f"bad expression in axiom: {exc}", lineno) from exc


def parse_embedded_expr_text(text: str) -> OpExpr:
    ts = TokenStream.of(text)
    e = parse_embedded_expr(ts)
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return e


def _parse_axiom_rhs(text: str, facts: FactBase, lineno: int) -> DomainSet:
    if text == "trivial":
        return TRIVIAL
    expr = _parse_call_arg(text, "dom", lineno)
    if not isinstance(expr, Atom):
        raise ParseError("axiom right-hand side must be 'trivial' or dom(<atom>)", lineno)
    return DomAtom(_require_atom(facts, expr.id, lineno))


# ---------------------------------------------------------------------------
# Raw structural domains


def domain_of(e: OpExpr | NormalForm, facts: FactBase) -> tuple[DomainSet, Derivation]:
    """Structural domain with no fact lookups: the composition rule
    ``dom(X * Y) = meet(dom(Y), pre(Y, dom(X)))`` (collapsing to ``dom(Y)``
    when ``dom(X)`` is the whole space), column-wise intersections for
    blocks, and a direct sum over input columns for monomial matrices.
    """
    if isinstance(e, tuple):
        if not e:
            return WHOLE, Derivation("D-ID", "dom(I) = whole")
        return domain_of(chain_expr(e), facts)
    if isinstance(e, ZeroBlock):
        return WHOLE, Derivation("D-ZERO", "dom(0) = whole")
    if isinstance(e, MonomialMatrix):
        return _monomial_domain(e, facts, _simplify=False)
    if isinstance(e, Atom):
        return _atom_domain(e.id, facts)
    if isinstance(e, Identity):
        return WHOLE, Derivation("D-ID", "dom(I) = whole")
    if isinstance(e, Zero):
        return WHOLE, Derivation("D-ZERO", "dom(0) = whole")
    if isinstance(e, Power):
        return domain_of(desugar_powers(e), facts)
    if isinstance(e, Inverse):
        s: DomainSet = RangeSet(e.inner)
        return s, Derivation("D-INV", f"dom({pretty_print(e)}) = {set_text(s)}")
    if isinstance(e, Adjoint):
        s = PreimageSet(e, WHOLE)
        return s, Derivation("D-FADJ", f"dom({pretty_print(e)}) = {set_text(s)}")
    if isinstance(e, Compose):
        dx, nx = domain_of(e.after, facts)
        dy, ny = domain_of(e.first, facts)
        if dx == WHOLE:
            return dy, Derivation(
                "D-COMP-EVW", f"dom({pretty_print(e)}) = {set_text(dy)}", (nx, ny)
            )
        s = Meet(dy, PreimageSet(e.first, dx))
        return s, Derivation("D-COMP", f"dom({pretty_print(e)}) = {set_text(s)}", (nx, ny))
    if isinstance(e, Block2):
        nodes = []
        sets = []
        for entry in e.entries():
            ds, node = domain_of(entry, facts)
            sets.append(ds)
            nodes.append(node)
        left = _meet_or_collapse(sets[0], sets[2])   # column one: e11 over e21
        right = _meet_or_collapse(sets[1], sets[3])  # column two: e12 over e22
        s = DirectSum(left, right)
        return s, Derivation(
            "D-BLOCK", f"dom({pretty_print(e)}) = {set_text(s)}", tuple(nodes)
        )
    raise TypeError(f"not an operator expression: {e!r}")


def _meet_or_collapse(a: DomainSet, b: DomainSet) -> DomainSet:
    if a == WHOLE:
        return b
    if b == WHOLE:
        return a
    return Meet(a, b)


def _atom_domain(atom: str, facts: FactBase) -> tuple[DomainSet, Derivation]:
    if facts.has_flag(atom, "everywhere_defined"):
        return WHOLE, Derivation(
            "D-ATOM-EVW", f"dom({atom}) = whole", (_flag_node(atom, "everywhere_defined"),)
        )
    s = DomAtom(atom)
    return s, Derivation("D-ATOM", f"dom({atom}) = {set_text(s)}")


# ---------------------------------------------------------------------------
# Injectivity


def injectivity_of(e: OpExpr | NormalForm, facts: FactBase) -> tuple[str, Derivation | None]:
    """``("yes", derivation)`` when injectivity is derivable, else
    ``("unknown", None)``.  Never answers "no"."""
    try:
        nf = normalize(e, facts.atoms)
    except NonNormalizable:
        return "unknown", None
    if isinstance(nf, ZeroBlock):
        return "unknown", None
    if isinstance(nf, tuple):
        node = _chain_injectivity(nf, facts)
        return ("yes", node) if node is not None else ("unknown", None)
    rows = []
    for chain in nf.chains:
        node = _chain_injectivity(chain, facts)
        if node is None:
            return "unknown", None
        rows.append(node)
    return "yes", Derivation("INJ-BLOCK", f"injective({mono_text(nf)})", tuple(rows))


def _chain_injectivity(chain: Chain, facts: FactBase) -> Derivation | None:
    premises = []
    for f in chain:
        node = _factor_injectivity(f, facts)
        if node is None:
            return None
        premises.append(node)
    return Derivation("INJ-COMP", f"injective({chain_text(chain)})", tuple(premises))


def _factor_injectivity(f: Factor, facts: FactBase) -> Derivation | None:
    if f.adjoint:
        return None
    text = pretty_print(factor_expr(f))
    if f.inverse:
        # an inverse, where defined, is injective by construction
        return Derivation("INJ-INV", f"injective({text})")
    if facts.has_flag(f.atom, "injective"):
        return Derivation(
            "INJ-ATOM", f"injective({text})", (_flag_node(f.atom, "injective"),)
        )
    return None


# ---------------------------------------------------------------------------
# Simplification

_MAX_SIMPLIFY_STEPS = 500


def simplify_domain(s: DomainSet, facts: FactBase) -> tuple[DomainSet, Derivation]:
    """Rewrite ``s`` to a fixpoint.  The derivation's premises are the
    individual steps, each of which rewrites exactly one position.

    Results are cached on the fact base (same set, same facts, same
    certificate), which keeps repeated sub-simplifications cheap.
    """
    cache = facts.__dict__.setdefault("_simplify_cache", {})
    hit = cache.get(s)
    if hit is not None:
        return hit
    steps: list[Derivation] = []
    cur = s
    for _ in range(_MAX_SIMPLIFY_STEPS):
        found = _rewrite_somewhere(cur, facts)
        if found is None:
            break
        nxt, rule, premises, axioms = found
        steps.append(
            Derivation(rule, f"{set_text(cur)} ==> {set_text(nxt)}", premises, axioms)
        )
        cur = nxt
    else:
        raise RuntimeError(f"simplification did not reach a fixpoint on {set_text(s)}")
    result = cur, Derivation("SIMPLIFY", f"{set_text(s)} ==> {set_text(cur)}", tuple(steps))
    cache[s] = result
    return result


_Rewrite = tuple[DomainSet, str, tuple[Derivation, ...], tuple[str, ...]]


def _rewrite_somewhere(s: DomainSet, facts: FactBase) -> _Rewrite | None:
    hit = _try_root_rules(s, facts)
    if hit is not None:
        return hit
    if isinstance(s, Meet):
        for side, other, rebuild in (
            (s.left, s.right, lambda x: Meet(x, s.right)),
            (s.right, s.left, lambda x: Meet(s.left, x)),
        ):
            sub = _rewrite_somewhere(side, facts)
            if sub is not None:
                new, rule, premises, axioms = sub
                return rebuild(new), rule, premises, axioms
        return None
    if isinstance(s, DirectSum):
        sub = _rewrite_somewhere(s.left, facts)
        if sub is not None:
            new, rule, premises, axioms = sub
            return DirectSum(new, s.right), rule, premises, axioms
        sub = _rewrite_somewhere(s.right, facts)
        if sub is not None:
            new, rule, premises, axioms = sub
            return DirectSum(s.left, new), rule, premises, axioms
        return None
    if isinstance(s, PreimageSet):
        sub = _rewrite_somewhere(s.inside, facts)
        if sub is not None:
            new, rule, premises, axioms = sub
            return PreimageSet(s.op, new), rule, premises, axioms
        return None
    return None


def _try_root_rules(s: DomainSet, facts: FactBase) -> _Rewrite | None:
    if isinstance(s, Meet):
        if s.left == TRIVIAL or s.right == TRIVIAL:
            return TRIVIAL, "S-INT-TRIV", (), ()
        if s.left == WHOLE:
            return s.right, "S-INT-WHOLE", (), ()
        if s.right == WHOLE:
            return s.left, "S-INT-WHOLE", (), ()
        if isinstance(s.left, DomAtom) and isinstance(s.right, DomAtom):
            key = frozenset((s.left.atom, s.right.atom))
            text = facts.meet_axioms.get(key)
            if text is not None:
                return TRIVIAL, "FACT-MATCH", (), (text,)
        return None
    if isinstance(s, DirectSum):
        if s.left == TRIVIAL and s.right == TRIVIAL:
            return TRIVIAL, "S-SUM-TRIV", (), ()
        return None
    if isinstance(s, RangeSet):
        return _try_range_fact(s, facts)
    if isinstance(s, PreimageSet):
        return _try_preimage_rules(s, facts)
    if isinstance(s, KernelSet):
        answer, node = injectivity_of(s.op, facts)
        if answer == "yes":
            assert node is not None
            return TRIVIAL, "S-KER-INJ", (node,), ()
        return None
    return None


def _try_range_fact(s: RangeSet, facts: FactBase) -> _Rewrite | None:
    try:
        nf = normalize(s.op, facts.atoms)
    except NonNormalizable:
        return None
    if not (isinstance(nf, tuple) and len(nf) == 1):
        return None
    f = nf[0]
    if f.adjoint:
        return None
    if f.inverse:
        # the range of an inverse is the domain of what it inverts
        return DomAtom(f.atom), "RANGE-FACT", (), ()
    fact = facts.range_axioms.get(f.atom)
    if fact is not None:
        target, text = fact
        return DomAtom(target), "RANGE-FACT", (), (text,)
    return None


def _try_preimage_rules(s: PreimageSet, facts: FactBase) -> _Rewrite | None:
    if s.inside == WHOLE:
        # a domain axiom on the operator answers pre(e, whole) = dom(e) outright
        try:
            nf = normalize(s.op, facts.atoms)
        except NonNormalizable:
            nf = None
        if isinstance(nf, tuple) and nf in facts.dom_axioms:
            rhs, text = facts.dom_axioms[nf]
            return rhs, "FACT-MATCH", (), (text,)
        raw, node = domain_of(s.op, facts)
        if raw != s:
            return raw, "S-PRE-WHOLE", (node,), ()
        return None
    if s.inside == TRIVIAL:
        return KernelSet(s.op), "S-PRE-TRIV", (), ()
    # the range-based collapse can only fire when ran(op) itself rewrites,
    # so probe the expensive sub-simplification only then
    if _try_range_fact(RangeSet(s.op), facts) is not None:
        probe = Meet(RangeSet(s.op), s.inside)
        simplified, subnode = simplify_domain(probe, facts)
        if simplified == TRIVIAL:
            return KernelSet(s.op), "S-PRE-RANGE", (subnode,), ()
    if isinstance(s.op, Compose):
        new = PreimageSet(s.op.first, PreimageSet(s.op.after, s.inside))
        return new, "S-PRE-COMP", (), ()
    return None


# ---------------------------------------------------------------------------
# Set-level verdicts


def _set_verdict(s: DomainSet, facts: FactBase) -> tuple[Verdict, Derivation]:
    if isinstance(s, TrivialSet):
        return Verdict.TRIVIAL, Derivation("SV-TRIV", "setverdict(trivial) = Trivial")
    if isinstance(s, Whole):
        return Verdict.DENSE, Derivation("SV-WHOLE", "setverdict(whole) = Dense")
    if isinstance(s, DomAtom):
        mark = facts.dense_marks.get(s.atom)
        if mark is not None:
            return Verdict.DENSE, Derivation(
                "SV-DENSE", f"setverdict({set_text(s)}) = Dense", (), (mark,)
            )
        if facts.has_flag(s.atom, "densely_defined"):
            return Verdict.DENSE, Derivation(
                "SV-DENSE",
                f"setverdict({set_text(s)}) = Dense",
                (_flag_node(s.atom, "densely_defined"),),
            )
        return Verdict.UNKNOWN, Derivation(
            "SV-UNKNOWN", f"setverdict({set_text(s)}) = Unknown"
        )
    if isinstance(s, DirectSum):
        vl, nl = _set_verdict(s.left, facts)
        vr, nr = _set_verdict(s.right, facts)
        v = sum_verdict(vl, vr)
        return v, Derivation("SV-SUM", f"setverdict({set_text(s)}) = {v}", (nl, nr))
    return Verdict.UNKNOWN, Derivation("SV-UNKNOWN", f"setverdict({set_text(s)}) = Unknown")


# ---------------------------------------------------------------------------
# Verdicts for expressions

_CHAIN_SEARCH_LIMIT = 8


@dataclass(frozen=True)
class _Cell:
    set: DomainSet
    node: Derivation  # a dom-judgment node: dom(<expr>) = <set>
    verdict: Verdict
    expr: OpExpr


def verdict_of(e: OpExpr | NormalForm, facts: FactBase) -> tuple[Verdict, Derivation]:
    """Most specific derivable verdict for the domain of ``e``.

    The expression is normalized first; for composition chains up to length
    8 every binary regrouping is searched and the groupings' definite
    verdicts are checked for agreement (:class:`ContradictionDetected`
    otherwise, which would signal an engine bug).
    """
    _, verdict, derivation = domain_summary(e, facts)
    return verdict, derivation


def domain_summary(
    e: OpExpr | NormalForm, facts: FactBase
) -> tuple[DomainSet, Verdict, Derivation]:
    """Simplified domain set, verdict, and full derivation for ``e``."""
    if isinstance(e, (MonomialMatrix, ZeroBlock, tuple)):
        nf: NormalForm = e
        source_text = mono_text(nf)
    else:
        e = desugar_powers(e)
        source_text = pretty_print(e)
        nf = normalize(e, facts.atoms)

    assumptions: tuple[Derivation, ...] = ()
    if isinstance(nf, MonomialMatrix) and nf.dim > 1:
        assumptions = (
            Derivation(
                "ASSUME-MONOMIAL", "block products are exact on monomial matrices"
            ),
        )
    norm_node = Derivation(
        "NORM", f"normal({source_text}) = {mono_text(nf)}", assumptions
    )

    if isinstance(nf, ZeroBlock):
        inner = Derivation("V-ZERO", f"verdict({mono_text(nf)}) = Dense")
        verdict = Verdict.DENSE
        domain: DomainSet = WHOLE
    else:
        if isinstance(nf, tuple):
            cell = _analyze_chain(nf, facts)
        else:
            cell = _monomial_cell(nf, facts)
        domain = cell.set
        verdict, sv_node = _set_verdict(cell.set, facts)
        inner = Derivation(
            "V-NF", f"verdict({mono_text(nf)}) = {verdict}", (cell.node, sv_node)
        )
    top = Derivation("VERDICT", f"verdict({source_text}) = {verdict}", (norm_node, inner))
    return domain, verdict, top


def _monomial_domain(
    m: MonomialMatrix, facts: FactBase, _simplify: bool
) -> tuple[DomainSet, Derivation]:
    nodes = []
    sets = []
    for c in range(m.dim):
        chain = m.column_chain(c)
        if _simplify:
            cell = _analyze_chain(chain, facts)
            sets.append(cell.set)
            nodes.append(cell.node)
        else:
            ds, node = domain_of(chain, facts)
            sets.append(ds)
            nodes.append(node)
    s: DomainSet = sets[-1]
    for part in reversed(sets[:-1]):
        s = DirectSum(part, s)
    return s, Derivation("D-MONO", f"dom({mono_text(m)}) = {set_text(s)}", tuple(nodes))


def _monomial_cell(m: MonomialMatrix, facts: FactBase) -> _Cell:
    raw, dnode = _monomial_domain(m, facts, _simplify=True)
    simplified, snode = simplify_domain(raw, facts)
    node = Derivation(
        "DOMSIMP", f"dom({mono_text(m)}) = {set_text(simplified)}", (dnode, snode)
    )
    v, _ = _set_verdict(simplified, facts)
    return _Cell(simplified, node, v, chain_expr(()))  # expr unused for matrices


def _analyze_chain(chain: Chain, facts: FactBase) -> _Cell:
    n = len(chain)
    if n == 0:
        ds, node = WHOLE, Derivation("D-ID", "dom(I) = whole")
        wrapped = _wrap_domsimp(chain_expr(()), ds, node, facts)
        return wrapped
    memo: dict[tuple[int, int], _Cell] = {}

    def cell(i: int, j: int) -> _Cell:
        key = (i, j)
        found = memo.get(key)
        if found is not None:
            return found
        candidates: list[_Cell] = []
        piece = chain[i:j]
        axiom = facts.dom_axioms.get(piece)
        if axiom is not None:
            rhs, text = axiom
            expr = chain_expr(piece)
            node = Derivation(
                "D-FACT", f"dom({pretty_print(expr)}) = {set_text(rhs)}", (), (text,)
            )
            v, _ = _set_verdict(rhs, facts)
            candidates.append(_Cell(rhs, node, v, expr))
        if j - i == 1:
            candidates.append(_factor_cell(piece[0], facts))
        elif j - i >= 2:
            splits = range(i + 1, j) if n <= _CHAIN_SEARCH_LIMIT else (i + 1,)
            for k in splits:
                left = cell(i, k)    # applied last
                right = cell(k, j)   # applied first
                expr = Compose(left.expr, right.expr)
                if left.set == WHOLE:
                    raw: DomainSet = right.set
                    rule = "D-COMP-EVW"
                else:
                    raw = Meet(right.set, PreimageSet(right.expr, left.set))
                    rule = "D-COMP"
                dnode = Derivation(
                    rule,
                    f"dom({pretty_print(expr)}) = {set_text(raw)}",
                    (left.node, right.node),
                )
                candidates.append(_wrap_domsimp(expr, raw, dnode, facts))
        _check_agreement(candidates, chain, i, j)
        best = max(
            candidates,
            key=lambda c: (_VERDICT_RANK[c.verdict], -_set_size(c.set)),
        )
        memo[key] = best
        return best

    return cell(0, n)


def _wrap_domsimp(
    expr: OpExpr,
    raw: DomainSet,
    dnode: Derivation,
    facts: FactBase,
) -> _Cell:
    simplified, snode = simplify_domain(raw, facts)
    node = Derivation(
        "DOMSIMP",
        f"dom({pretty_print(expr)}) = {set_text(simplified)}",
        (dnode, snode),
    )
    v, _ = _set_verdict(simplified, facts)
    return _Cell(simplified, node, v, expr)


def _factor_cell(f: Factor, facts: FactBase) -> _Cell:
    expr = factor_expr(f)
    raw, dnode = domain_of(expr, facts)
    return _wrap_domsimp(expr, raw, dnode, facts)


def _check_agreement(candidates: list[_Cell], chain: Chain, i: int, j: int) -> None:
    definite = [c for c in candidates if c.verdict.is_definite]
    for a in definite:
        for b in definite:
            if verdict_conflicts(a.verdict, b.verdict):
                raise ContradictionDetected(
                    f"groupings of {chain_text(chain[i:j])} yield both "
                    f"{a.verdict} ({set_text(a.set)}) and {b.verdict} ({set_text(b.set)})"
                )
