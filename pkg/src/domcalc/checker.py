"""Independent re-checking of derivation certificates.

The checker replays a :class:`~domcalc.domains.Derivation` bottom-up.  Every
node's conclusion is re-parsed from its canonical text and matched against a
per-rule template: leaves must be axioms of the fact base, declared flags,
or premise-free structural facts; inner nodes must follow from their
premises by exactly their named rule.  Where a rule's content is a
deterministic computation (normal forms, structural domain assembly) the
checker recomputes it; the search layers — regrouping choice and the
simplification fixpoint driver — are never consulted, so an accepted
certificate stands on its own.

``verify_derivation`` returns a plain bool; ``explain_failure`` returns the
first failing node and the reason, for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomcalcError, NonNormalizable, ParseError
from .expr import Adjoint, Atom, Block2, Compose, Identity, Inverse, OpExpr, Zero
from .normalize import (
    Factor,
    MonomialMatrix,
    NormalForm,
    ZeroBlock,
    mono_text,
    normalize,
)
from .parser import TokenStream, parse_embedded_expr
from .domains import (
    Derivation,
    DirectSum,
    DomAtom,
    DomainSet,
    FactBase,
    KernelSet,
    Meet,
    PreimageSet,
    RangeSet,
    TRIVIAL,
    TrivialSet,
    Verdict,
    WHOLE,
    Whole,
    _meet_or_collapse,
    parse_set_embedded,
    sum_verdict,
)

_ASSUMPTION_TEXT = "block products are exact on monomial matrices"


class _Reject(Exception):
    def __init__(self, node: Derivation, reason: str):
        super().__init__(reason)
        self.node = node
        self.reason = reason


# ---------------------------------------------------------------------------
# Judgment parsing


@dataclass(frozen=True)
class _DomJ:
    subject_text: str
    subject: OpExpr | NormalForm
    set: DomainSet


@dataclass(frozen=True)
class _SimpJ:
    before: DomainSet
    after: DomainSet


@dataclass(frozen=True)
class _InjJ:
    subject_text: str
    subject: OpExpr | NormalForm


@dataclass(frozen=True)
class _FlagJ:
    atom: str
    flag: str


@dataclass(frozen=True)
class _NormJ:
    subject_text: str
    subject: OpExpr | NormalForm
    nf_text: str


@dataclass(frozen=True)
class _SetVJ:
    set: DomainSet
    verdict: Verdict


@dataclass(frozen=True)
class _VerdictJ:
    subject_text: str
    subject: OpExpr | NormalForm
    verdict: Verdict


@dataclass(frozen=True)
class _AssumeJ:
    pass


_Judgment = _DomJ | _SimpJ | _InjJ | _FlagJ | _NormJ | _SetVJ | _VerdictJ | _AssumeJ


def _split_top(text: str, sep: str) -> tuple[str, str] | None:
    depth = 0
    for i in range(len(text) - len(sep) + 1):
        c = text[i]
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            return text[:i], text[i + len(sep):]
    return None


def _parse_subject(text: str) -> OpExpr | NormalForm:
    ts = TokenStream.of(text)
    head = ts.peek()
    if head.kind == "IDENT" and head.text in ("mono", "zero"):
        nf = _parse_nf_literal(ts)
        _expect_end(ts)
        return nf
    e = parse_embedded_expr(ts)
    _expect_end(ts)
    return e


def _expect_end(ts: TokenStream) -> None:
    tok = ts.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)


def _parse_nf_literal(ts: TokenStream) -> NormalForm:
    head = ts.expect("IDENT")
    if head.text == "zero":
        ts.expect("LPAREN")
        level = int(ts.expect("INT").text)
        ts.expect("RPAREN")
        from .expr import shape_of_level

        return ZeroBlock(shape_of_level(level))
    ts.expect("LPAREN")
    dim = int(ts.expect("INT").text)
    rows: dict[int, tuple[int, tuple[Factor, ...]]] = {}
    while ts.match("SEMI"):
        r = int(ts.expect("INT").text)
        ts.expect("LT")
        ts.expect("MINUS")
        c = int(ts.expect("INT").text)
        ts.expect("COLON")
        chain_e = parse_embedded_expr(ts)
        nf = normalize(chain_e)
        if not isinstance(nf, tuple):
            raise ParseError("matrix rows must hold scalar chains")
        rows[r] = (c, nf)
    ts.expect("RPAREN")
    if sorted(rows) != list(range(dim)):
        raise ParseError("matrix literal must list every row once")
    col = tuple(rows[r][0] for r in range(dim))
    chains = tuple(rows[r][1] for r in range(dim))
    from .expr import shape_of_level

    return MonomialMatrix(dim, col, chains, shape_of_level(dim.bit_length() - 1))


def _parse_verdict(text: str) -> Verdict:
    for v in Verdict:
        if v.value == text:
            return v
    raise ParseError(f"unknown verdict {text!r}")


def _parse_judgment(text: str) -> _Judgment:
    if text == _ASSUMPTION_TEXT:
        return _AssumeJ()
    split = _split_top(text, " ==> ")
    if split is not None:
        before, after = split
        return _SimpJ(_parse_set_text(before), _parse_set_text(after))
    split = _split_top(text, " = ")
    if split is not None:
        lhs, rhs = split
        if lhs.startswith("dom(") and lhs.endswith(")"):
            body = lhs[4:-1]
            return _DomJ(body, _parse_subject(body), _parse_set_text(rhs))
        if lhs.startswith("normal(") and lhs.endswith(")"):
            body = lhs[7:-1]
            return _NormJ(body, _parse_subject(body), rhs)
        if lhs.startswith("setverdict(") and lhs.endswith(")"):
            return _SetVJ(_parse_set_text(lhs[11:-1]), _parse_verdict(rhs))
        if lhs.startswith("verdict(") and lhs.endswith(")"):
            body = lhs[8:-1]
            return _VerdictJ(body, _parse_subject(body), _parse_verdict(rhs))
        raise ParseError(f"unrecognized judgment {text!r}")
    if text.startswith("injective(") and text.endswith(")"):
        body = text[10:-1]
        return _InjJ(body, _parse_subject(body))
    if text.startswith("flag(") and text.endswith(")"):
        inner = text[5:-1]
        parts = [p.strip() for p in inner.split(",")]
        if len(parts) != 2:
            raise ParseError(f"malformed flag judgment {text!r}")
        return _FlagJ(parts[0], parts[1])
    raise ParseError(f"unrecognized judgment {text!r}")


def _parse_set_text(text: str) -> DomainSet:
    ts = TokenStream.of(text)
    s = parse_set_embedded(ts)
    _expect_end(ts)
    return s


# ---------------------------------------------------------------------------
# Tree diff for single-step rewrites


def _diff(a: DomainSet, b: DomainSet, out: list[tuple[DomainSet, DomainSet]]) -> None:
    if a == b:
        return
    if isinstance(a, Meet) and isinstance(b, Meet):
        before = len(out)
        _diff(a.left, b.left, out)
        _diff(a.right, b.right, out)
        if len(out) > before:
            return
    if isinstance(a, DirectSum) and isinstance(b, DirectSum):
        before = len(out)
        _diff(a.left, b.left, out)
        _diff(a.right, b.right, out)
        if len(out) > before:
            return
    if isinstance(a, PreimageSet) and isinstance(b, PreimageSet) and a.op == b.op:
        _diff(a.inside, b.inside, out)
        return
    out.append((a, b))


def _single_rewrite(before: DomainSet, after: DomainSet) -> tuple[DomainSet, DomainSet]:
    out: list[tuple[DomainSet, DomainSet]] = []
    _diff(before, after, out)
    if len(out) != 1:
        raise ParseError(f"step must rewrite exactly one position, found {len(out)}")
    return out[0]


# ---------------------------------------------------------------------------
# Checker core


def verify_derivation(d: Derivation, facts: FactBase) -> bool:
    """True iff every node's conclusion follows from its rule, premises and
    cited axioms."""
    ok, _, _ = explain_failure(d, facts)
    return ok


def explain_failure(
    d: Derivation, facts: FactBase
) -> tuple[bool, Derivation | None, str | None]:
    """Like :func:`verify_derivation` but carries the first failing node."""
    try:
        _check(d, facts)
        return True, None, None
    except _Reject as r:
        return False, r.node, r.reason
    except (DomcalcError, ValueError) as exc:
        return False, d, f"unparseable derivation: {exc}"


def _check(d: Derivation, facts: FactBase) -> _Judgment:
    for p in d.premises:
        _check(p, facts)
    try:
        j = _parse_judgment(d.conclusion)
    except (DomcalcError, ValueError) as exc:
        raise _Reject(d, f"cannot parse conclusion: {exc}") from exc
    template = _TEMPLATES.get(d.rule)
    if template is None:
        raise _Reject(d, f"unknown rule {d.rule!r}")
    try:
        template(d, j, facts)
    except _Reject:
        raise
    except (DomcalcError, ValueError) as exc:
        raise _Reject(d, f"template error: {exc}") from exc
    return j


def _fail(d: Derivation, reason: str):
    raise _Reject(d, reason)


def _need(d: Derivation, cond: bool, reason: str) -> None:
    if not cond:
        _fail(d, reason)


def _no_extras(d: Derivation, premises: int = 0, axioms: int = 0) -> None:
    _need(d, len(d.premises) == premises, f"rule {d.rule} takes {premises} premises")
    _need(d, len(d.axioms) == axioms, f"rule {d.rule} cites {axioms} axioms")


def _premise_judgment(d: Derivation, i: int) -> _Judgment:
    return _parse_judgment(d.premises[i].conclusion)


def _as_dom(d: Derivation, j: _Judgment) -> _DomJ:
    if not isinstance(j, _DomJ):
        _fail(d, "conclusion is not a domain judgment")
    return j


def _norm_subject(subject: OpExpr | NormalForm, facts: FactBase) -> NormalForm:
    return normalize(subject, facts.atoms)


# -- leaf templates ----------------------------------------------------------


def _t_flag(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _FlagJ), "FLAG concludes flag(atom, flag)")
    assert isinstance(j, _FlagJ)
    _no_extras(d)
    _need(d, facts.has_flag(j.atom, j.flag), f"{j.atom} does not carry {j.flag}")


def _t_assume(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _AssumeJ), "fixed assumption text required")
    _no_extras(d)


def _t_d_atom(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d)
    _need(d, isinstance(j.subject, Atom), "D-ATOM takes an atom")
    assert isinstance(j.subject, Atom)
    _need(d, j.set == DomAtom(j.subject.id), "set must be the atom's domain")


def _t_d_atom_evw(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d, premises=1)
    _need(d, isinstance(j.subject, Atom), "D-ATOM-EVW takes an atom")
    assert isinstance(j.subject, Atom)
    p = _premise_judgment(d, 0)
    _need(
        d,
        isinstance(p, _FlagJ) and p.atom == j.subject.id and p.flag == "everywhere_defined",
        "premise must be the everywhere_defined flag",
    )
    _need(d, j.set == WHOLE, "an everywhere defined atom has the whole space as domain")


def _t_d_id(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d)
    _need(d, isinstance(j.subject, Identity), "D-ID takes the identity")
    _need(d, j.set == WHOLE, "the identity is everywhere defined")


def _t_d_zero(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d)
    _need(d, isinstance(j.subject, (Zero, ZeroBlock)), "D-ZERO takes the zero operator")
    _need(d, j.set == WHOLE, "the zero operator is everywhere defined")


def _t_d_inv(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d)
    _need(d, isinstance(j.subject, Inverse), "D-INV takes an inverse")
    assert isinstance(j.subject, Inverse)
    _need(d, j.set == RangeSet(j.subject.inner), "dom(X^-1) = ran(X)")


def _t_d_fadj(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d)
    _need(d, isinstance(j.subject, Adjoint), "D-FADJ takes a symbolic adjoint")
    _need(
        d,
        isinstance(j.subject, OpExpr) and j.set == PreimageSet(j.subject, WHOLE),
        "dom of a symbolic adjoint stays opaque",
    )


def _t_d_fact(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _as_dom(d, j)
    _no_extras(d, axioms=1)
    _need(d, d.axioms[0] == d.conclusion, "D-FACT conclusion must equal the cited axiom")
    _need(d, d.conclusion in facts.axiom_texts(), "cited axiom not in the fact base")


def _dom_premise(d: Derivation, i: int) -> _DomJ:
    p = _premise_judgment(d, i)
    if not isinstance(p, _DomJ):
        _fail(d, f"premise {i} must be a domain judgment")
    return p  # type: ignore[return-value]


def _t_d_comp(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d, premises=2)
    _need(d, isinstance(j.subject, Compose), "D-COMP takes a composition")
    assert isinstance(j.subject, Compose)
    px = _dom_premise(d, 0)
    py = _dom_premise(d, 1)
    _need(d, px.subject == j.subject.after, "first premise must cover the outer factor")
    _need(d, py.subject == j.subject.first, "second premise must cover the inner factor")
    if d.rule == "D-COMP-EVW":
        _need(d, px.set == WHOLE, "outer factor must have whole-space domain")
        _need(d, j.set == py.set, "dom(X * Y) = dom(Y) when dom(X) is whole")
    else:
        expected = Meet(py.set, PreimageSet(j.subject.first, px.set))
        _need(d, j.set == expected, "dom(X * Y) = meet(dom(Y), pre(Y, dom(X)))")


def _t_d_block(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d, premises=4)
    _need(d, isinstance(j.subject, Block2), "D-BLOCK takes a 2x2 block")
    assert isinstance(j.subject, Block2)
    sets = []
    for i, entry in enumerate(j.subject.entries()):
        p = _dom_premise(d, i)
        _need(d, p.subject == entry, f"premise {i} must cover block entry {i}")
        sets.append(p.set)
    expected = DirectSum(
        _meet_or_collapse(sets[0], sets[2]), _meet_or_collapse(sets[1], sets[3])
    )
    _need(d, j.set == expected, "block domain is the sum of column intersections")


def _t_d_mono(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _need(d, len(d.axioms) == 0, "D-MONO cites no axioms")
    _need(d, isinstance(j.subject, MonomialMatrix), "D-MONO takes a monomial matrix")
    assert isinstance(j.subject, MonomialMatrix)
    m = j.subject
    _need(d, len(d.premises) == m.dim, "one premise per input column")
    sets = []
    for c in range(m.dim):
        p = _dom_premise(d, c)
        nf = _norm_subject(p.subject, facts)
        _need(
            d,
            isinstance(nf, tuple) and nf == m.column_chain(c),
            f"premise {c} must cover the chain reading column {c}",
        )
        sets.append(p.set)
    expected: DomainSet = sets[-1]
    for part in reversed(sets[:-1]):
        expected = DirectSum(part, expected)
    _need(d, j.set == expected, "matrix domain is the column-wise direct sum")


def _t_domsimp(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    j = _as_dom(d, j)
    _no_extras(d, premises=2)
    raw = _dom_premise(d, 0)
    _need(d, raw.subject_text == j.subject_text, "raw premise must cover the same subject")
    p = _premise_judgment(d, 1)
    _need(d, isinstance(p, _SimpJ), "second premise must be a simplification")
    assert isinstance(p, _SimpJ)
    _need(d, p.before == raw.set, "simplification must start from the raw domain")
    _need(d, p.after == j.set, "simplification must end at the concluded set")
    _need(d, d.premises[1].rule == "SIMPLIFY", "second premise must be a SIMPLIFY node")


# -- simplification ----------------------------------------------------------


def _t_simplify(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SimpJ), "SIMPLIFY concludes before ==> after")
    assert isinstance(j, _SimpJ)
    _need(d, len(d.axioms) == 0, "SIMPLIFY cites no axioms")
    cur = j.before
    for i, step in enumerate(d.premises):
        sj = _parse_judgment(step.conclusion)
        _need(d, isinstance(sj, _SimpJ), f"step {i} must be a rewrite")
        assert isinstance(sj, _SimpJ)
        _need(d, sj.before == cur, f"step {i} does not continue the chain")
        _need(d, step.rule in _STEP_RULES, f"step {i} uses non-step rule {step.rule}")
        cur = sj.after
    _need(d, cur == j.after, "steps do not reach the final set")


def _t_step(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SimpJ), "rewrite steps conclude before ==> after")
    assert isinstance(j, _SimpJ)
    before, after = _single_rewrite(j.before, j.after)
    _STEP_RULES[d.rule](d, before, after, facts)


def _s_int_triv(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d)
    _need(
        d,
        isinstance(before, Meet) and TRIVIAL in (before.left, before.right),
        "S-INT-TRIV needs a trivial side",
    )
    _need(d, after == TRIVIAL, "intersection with {0} is {0}")


def _s_int_whole(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d)
    _need(d, isinstance(before, Meet), "S-INT-WHOLE rewrites an intersection")
    assert isinstance(before, Meet)
    ok = (before.left == WHOLE and after == before.right) or (
        before.right == WHOLE and after == before.left
    )
    _need(d, ok, "the whole space is the unit of intersection")


def _s_sum_triv(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d)
    _need(
        d,
        isinstance(before, DirectSum)
        and before.left == TRIVIAL
        and before.right == TRIVIAL
        and after == TRIVIAL,
        "S-SUM-TRIV collapses a sum of trivial parts",
    )


def _s_fact_match(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d, axioms=1)
    cited = d.axioms[0]
    _need(d, cited in facts.axiom_texts(), "cited axiom not in the fact base")
    if isinstance(before, Meet) and isinstance(before.left, DomAtom) and isinstance(
        before.right, DomAtom
    ):
        expected = FactBase.meet_axiom_text(before.left.atom, before.right.atom)
        _need(d, cited == expected, "cited axiom does not match the intersection")
        _need(d, after == TRIVIAL, "meet axioms conclude the trivial set")
        return
    if isinstance(before, PreimageSet) and before.inside == WHOLE:
        nf = _norm_subject(before.op, facts)
        _need(d, isinstance(nf, tuple), "domain axioms cover scalar chains")
        assert isinstance(nf, tuple)
        fact = facts.dom_axioms.get(nf)
        _need(d, fact is not None and fact[1] == cited, "cited axiom does not match")
        assert fact is not None
        _need(d, after == fact[0], "rewrite must produce the axiom right-hand side")
        return
    _fail(d, "FACT-MATCH applies to meets of atom domains or pre(e, whole)")


def _s_range_fact(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _need(d, len(d.premises) == 0, "RANGE-FACT takes no premises")
    _need(d, isinstance(before, RangeSet), "RANGE-FACT rewrites a range")
    assert isinstance(before, RangeSet)
    nf = _norm_subject(before.op, facts)
    _need(
        d,
        isinstance(nf, tuple) and len(nf) == 1 and not nf[0].adjoint,
        "RANGE-FACT covers single factors",
    )
    assert isinstance(nf, tuple)
    f = nf[0]
    if f.inverse:
        _need(d, len(d.axioms) == 0, "intrinsic inverse ranges cite nothing")
        _need(d, after == DomAtom(f.atom), "ran(a^-1) = dom(a)")
        return
    _need(d, len(d.axioms) == 1, "atom ranges cite their range axiom")
    fact = facts.range_axioms.get(f.atom)
    _need(d, fact is not None and fact[1] == d.axioms[0], "cited range axiom mismatch")
    assert fact is not None
    _need(d, after == DomAtom(fact[0]), "rewrite must produce the axiom target")


def _s_pre_triv(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d)
    _need(
        d,
        isinstance(before, PreimageSet) and before.inside == TRIVIAL,
        "S-PRE-TRIV rewrites pre(e, trivial)",
    )
    assert isinstance(before, PreimageSet)
    _need(d, after == KernelSet(before.op), "the only vector sent into {0} lies in ker")


def _s_pre_whole(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _need(d, len(d.axioms) == 0 and len(d.premises) == 1, "S-PRE-WHOLE takes one premise")
    _need(
        d,
        isinstance(before, PreimageSet) and before.inside == WHOLE,
        "S-PRE-WHOLE rewrites pre(e, whole)",
    )
    assert isinstance(before, PreimageSet)
    p = _dom_premise(d, 0)
    _need(d, p.subject == before.op, "premise must cover the operator")
    _need(d, after == p.set, "pre(e, whole) is dom(e)")


def _s_pre_range(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _need(d, len(d.axioms) == 0 and len(d.premises) == 1, "S-PRE-RANGE takes one premise")
    _need(d, isinstance(before, PreimageSet), "S-PRE-RANGE rewrites a preimage")
    assert isinstance(before, PreimageSet)
    _need(d, d.premises[0].rule == "SIMPLIFY", "premise must be a simplification")
    p = _premise_judgment(d, 0)
    _need(d, isinstance(p, _SimpJ), "premise must be a simplification")
    assert isinstance(p, _SimpJ)
    _need(
        d,
        p.before == Meet(RangeSet(before.op), before.inside) and p.after == TRIVIAL,
        "premise must show meet(ran(e), S) trivial",
    )
    _need(d, after == KernelSet(before.op), "then only kernel vectors land in S")


def _s_pre_comp(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _no_extras(d)
    _need(
        d,
        isinstance(before, PreimageSet) and isinstance(before.op, Compose),
        "S-PRE-COMP rewrites pre(X * Y, S)",
    )
    assert isinstance(before, PreimageSet) and isinstance(before.op, Compose)
    expected = PreimageSet(
        before.op.first, PreimageSet(before.op.after, before.inside)
    )
    _need(d, after == expected, "pre(X * Y, S) = pre(Y, pre(X, S))")


def _s_ker_inj(d: Derivation, before: DomainSet, after: DomainSet, facts: FactBase) -> None:
    _need(d, len(d.axioms) == 0 and len(d.premises) == 1, "S-KER-INJ takes one premise")
    _need(d, isinstance(before, KernelSet), "S-KER-INJ rewrites a kernel")
    assert isinstance(before, KernelSet)
    p = _premise_judgment(d, 0)
    _need(d, isinstance(p, _InjJ), "premise must be an injectivity judgment")
    assert isinstance(p, _InjJ)
    _need(
        d,
        _norm_subject(p.subject, facts) == _norm_subject(before.op, facts),
        "injectivity premise must cover the same operator",
    )
    _need(d, after == TRIVIAL, "an injective operator has trivial kernel")


_STEP_RULES = {
    "S-INT-TRIV": _s_int_triv,
    "S-INT-WHOLE": _s_int_whole,
    "S-SUM-TRIV": _s_sum_triv,
    "FACT-MATCH": _s_fact_match,
    "RANGE-FACT": _s_range_fact,
    "S-PRE-TRIV": _s_pre_triv,
    "S-PRE-WHOLE": _s_pre_whole,
    "S-PRE-RANGE": _s_pre_range,
    "S-PRE-COMP": _s_pre_comp,
    "S-KER-INJ": _s_ker_inj,
}


# -- injectivity -------------------------------------------------------------


def _t_inj_atom(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _InjJ), "INJ-ATOM concludes injectivity")
    assert isinstance(j, _InjJ)
    _no_extras(d, premises=1)
    _need(d, isinstance(j.subject, Atom), "INJ-ATOM takes an atom")
    assert isinstance(j.subject, Atom)
    p = _premise_judgment(d, 0)
    _need(
        d,
        isinstance(p, _FlagJ) and p.atom == j.subject.id and p.flag == "injective",
        "premise must be the injective flag",
    )


def _t_inj_inv(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _InjJ), "INJ-INV concludes injectivity")
    assert isinstance(j, _InjJ)
    _no_extras(d)
    nf = _norm_subject(j.subject, facts)
    _need(
        d,
        isinstance(nf, tuple)
        and len(nf) == 1
        and nf[0].inverse
        and not nf[0].adjoint,
        "INJ-INV covers inverse factors, injective by construction",
    )


def _t_inj_comp(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _InjJ), "INJ-COMP concludes injectivity")
    assert isinstance(j, _InjJ)
    _need(d, len(d.axioms) == 0, "INJ-COMP cites no axioms")
    nf = _norm_subject(j.subject, facts)
    _need(d, isinstance(nf, tuple), "INJ-COMP covers scalar chains")
    assert isinstance(nf, tuple)
    _need(d, len(d.premises) == len(nf), "one premise per factor")
    for i, f in enumerate(nf):
        p = _premise_judgment(d, i)
        _need(d, isinstance(p, _InjJ), f"premise {i} must be an injectivity judgment")
        assert isinstance(p, _InjJ)
        _need(
            d,
            _norm_subject(p.subject, facts) == (f,),
            f"premise {i} must cover factor {i}",
        )


def _t_inj_block(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _InjJ), "INJ-BLOCK concludes injectivity")
    assert isinstance(j, _InjJ)
    _need(d, len(d.axioms) == 0, "INJ-BLOCK cites no axioms")
    nf = _norm_subject(j.subject, facts)
    _need(d, isinstance(nf, MonomialMatrix), "INJ-BLOCK covers monomial matrices")
    assert isinstance(nf, MonomialMatrix)
    _need(d, len(d.premises) == nf.dim, "one premise per row chain")
    for i in range(nf.dim):
        p = _premise_judgment(d, i)
        _need(d, isinstance(p, _InjJ), f"premise {i} must be an injectivity judgment")
        assert isinstance(p, _InjJ)
        _need(
            d,
            _norm_subject(p.subject, facts) == nf.chains[i],
            f"premise {i} must cover row {i}",
        )


# -- set verdicts ------------------------------------------------------------


def _t_sv_triv(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SetVJ), "set-verdict judgment required")
    assert isinstance(j, _SetVJ)
    _no_extras(d)
    _need(
        d,
        isinstance(j.set, TrivialSet) and j.verdict is Verdict.TRIVIAL,
        "the trivial set is Trivial",
    )


def _t_sv_whole(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SetVJ), "set-verdict judgment required")
    assert isinstance(j, _SetVJ)
    _no_extras(d)
    _need(
        d,
        isinstance(j.set, Whole) and j.verdict is Verdict.DENSE,
        "the whole space is Dense",
    )


def _t_sv_dense(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SetVJ), "set-verdict judgment required")
    assert isinstance(j, _SetVJ)
    _need(d, isinstance(j.set, DomAtom), "SV-DENSE covers atom domains")
    assert isinstance(j.set, DomAtom)
    _need(d, j.verdict is Verdict.DENSE, "SV-DENSE concludes Dense")
    if d.axioms:
        _no_extras(d, premises=0, axioms=1)
        expected = FactBase.dense_mark_text(j.set.atom)
        _need(d, d.axioms[0] == expected, "cited mark does not match the atom")
        _need(d, expected in facts.axiom_texts(), "density mark not in the fact base")
    else:
        _no_extras(d, premises=1, axioms=0)
        p = _premise_judgment(d, 0)
        _need(
            d,
            isinstance(p, _FlagJ)
            and p.atom == j.set.atom
            and p.flag == "densely_defined",
            "premise must be the densely_defined flag",
        )


def _t_sv_unknown(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SetVJ), "set-verdict judgment required")
    assert isinstance(j, _SetVJ)
    _no_extras(d)
    _need(d, j.verdict is Verdict.UNKNOWN, "SV-UNKNOWN concludes Unknown")


def _t_sv_sum(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _SetVJ), "set-verdict judgment required")
    assert isinstance(j, _SetVJ)
    _need(d, len(d.axioms) == 0, "SV-SUM cites no axioms")
    _need(d, isinstance(j.set, DirectSum), "SV-SUM covers direct sums")
    assert isinstance(j.set, DirectSum)
    _need(d, len(d.premises) == 2, "SV-SUM takes two premises")
    pl = _premise_judgment(d, 0)
    pr = _premise_judgment(d, 1)
    _need(
        d,
        isinstance(pl, _SetVJ) and isinstance(pr, _SetVJ),
        "premises must be set verdicts",
    )
    assert isinstance(pl, _SetVJ) and isinstance(pr, _SetVJ)
    _need(d, pl.set == j.set.left and pr.set == j.set.right, "premises must cover both parts")
    _need(d, j.verdict is sum_verdict(pl.verdict, pr.verdict), "wrong combination")


# -- expression verdicts -----------------------------------------------------


def _t_norm(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _NormJ), "NORM concludes normal(e) = nf")
    assert isinstance(j, _NormJ)
    _need(d, len(d.axioms) == 0, "NORM cites no axioms")
    for p in d.premises:
        _need(d, p.rule == "ASSUME-MONOMIAL", "NORM premises carry only the assumption")
    _need(d, len(d.premises) <= 1, "at most one recorded assumption")
    try:
        nf = _norm_subject(j.subject, facts)
    except NonNormalizable as exc:
        _fail(d, f"subject does not normalize: {exc}")
    _need(d, mono_text(nf) == j.nf_text, "replayed normal form differs")


def _t_v_zero(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _VerdictJ), "verdict judgment required")
    assert isinstance(j, _VerdictJ)
    _no_extras(d)
    _need(d, isinstance(j.subject, (ZeroBlock, Zero)), "V-ZERO covers the zero operator")
    _need(d, j.verdict is Verdict.DENSE, "the zero operator is everywhere defined")


def _t_v_nf(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _VerdictJ), "verdict judgment required")
    assert isinstance(j, _VerdictJ)
    _need(d, len(d.axioms) == 0, "V-NF cites no axioms")
    _need(d, len(d.premises) == 2, "V-NF takes a domain node and a set verdict")
    dom = _dom_premise(d, 0)
    _need(
        d,
        _norm_subject(dom.subject, facts) == _norm_subject(j.subject, facts),
        "domain premise must cover the same operator",
    )
    sv = _premise_judgment(d, 1)
    _need(d, isinstance(sv, _SetVJ), "second premise must be a set verdict")
    assert isinstance(sv, _SetVJ)
    _need(d, sv.set == dom.set, "set verdict must rate the derived domain")
    _need(d, j.verdict is sv.verdict, "verdict must match the set verdict")


def _t_verdict(d: Derivation, j: _Judgment, facts: FactBase) -> None:
    _need(d, isinstance(j, _VerdictJ), "verdict judgment required")
    assert isinstance(j, _VerdictJ)
    _need(d, len(d.axioms) == 0, "VERDICT cites no axioms")
    _need(d, len(d.premises) == 2, "VERDICT takes NORM and an inner verdict")
    _need(d, d.premises[0].rule == "NORM", "first premise must be NORM")
    pn = _premise_judgment(d, 0)
    assert isinstance(pn, _NormJ)
    _need(d, pn.subject_text == j.subject_text, "NORM must cover the same expression")
    _need(d, d.premises[1].rule in ("V-NF", "V-ZERO"), "inner premise must rate the nf")
    pv = _premise_judgment(d, 1)
    assert isinstance(pv, _VerdictJ)
    _need(d, pv.subject_text == pn.nf_text, "inner verdict must rate the normal form")
    _need(d, pv.verdict is j.verdict, "verdict must match the inner verdict")


_TEMPLATES = {
    "FLAG": _t_flag,
    "ASSUME-MONOMIAL": _t_assume,
    "D-ATOM": _t_d_atom,
    "D-ATOM-EVW": _t_d_atom_evw,
    "D-ID": _t_d_id,
    "D-ZERO": _t_d_zero,
    "D-INV": _t_d_inv,
    "D-FADJ": _t_d_fadj,
    "D-FACT": _t_d_fact,
    "D-COMP": _t_d_comp,
    "D-COMP-EVW": _t_d_comp,
    "D-BLOCK": _t_d_block,
    "D-MONO": _t_d_mono,
    "DOMSIMP": _t_domsimp,
    "SIMPLIFY": _t_simplify,
    "INJ-ATOM": _t_inj_atom,
    "INJ-INV": _t_inj_inv,
    "INJ-COMP": _t_inj_comp,
    "INJ-BLOCK": _t_inj_block,
    "SV-TRIV": _t_sv_triv,
    "SV-WHOLE": _t_sv_whole,
    "SV-DENSE": _t_sv_dense,
    "SV-UNKNOWN": _t_sv_unknown,
    "SV-SUM": _t_sv_sum,
    "NORM": _t_norm,
    "V-ZERO": _t_v_zero,
    "V-NF": _t_v_nf,
    "VERDICT": _t_verdict,
    **{name: _t_step for name in (
        "S-INT-TRIV",
        "S-INT-WHOLE",
        "S-SUM-TRIV",
        "FACT-MATCH",
        "RANGE-FACT",
        "S-PRE-TRIV",
        "S-PRE-WHOLE",
        "S-PRE-RANGE",
        "S-PRE-COMP",
        "S-KER-INJ",
    )},
}

RULE_NAMES = frozenset(_TEMPLATES)
