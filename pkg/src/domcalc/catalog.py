"""Named scenarios: block-operator constructions with known domain verdicts.

Each scenario packages a fact base, named expressions, and the expected
verdict table.  The catalog covers:

* ``kosaki`` — an unbounded self-adjoint positive multiplier ``A`` with a
  bounded everywhere defined inverse ``Ai``, and a second operator ``B``
  whose domain meets ``dom(A)`` only in {0}.  One composition order has
  trivial domain, the other a dense one.
* ``adjoint-trivial`` — a densely defined ``T`` with
  ``dom(T') = dom(T^2) = dom(T T') = dom(T' T) = {0}``.
* ``cube`` — an off-diagonal block ``T`` with ``dom(T^2)`` nontrivial but
  ``dom(T^3) = {0}``, on both the operator and its adjoint.
* ``fourth`` — the doubled construction with trivial fourth powers.
* ``sixth`` — the doubled construction with trivial sixth powers.
* ``nested:n`` — the inductive doubling: trivial exactly from power ``2^n``.

``conjecture_status`` reports for which power the catalog settles the
existence question of an operator with ``dom(T^(n-1))`` and
``dom(T'^(n-1))`` nonzero but ``dom(T^n) = dom(T'^n) = {0}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DomcalcError, OutOfRange, UnknownScenario
from .expr import (
    Adjoint,
    Atom,
    BASE,
    OpExpr,
    Power,
    diag,
    offdiag,
    shape_of,
    swap,
)
from .domains import Derivation, FactBase, Verdict, load_facts, verdict_of, verdict_satisfies
from .normalize import Factor, MonomialMatrix, normalize
from .expr import shape_of_level

KOSAKI_FACTS = """\
# Unbounded self-adjoint positive multiplier A with bounded everywhere
# defined inverse Ai, and a conjugate partner B meeting dom(A) only in {0}.
atom A  { self_adjoint, positive, injective, unbounded }
atom B  { self_adjoint, positive, injective, unbounded }
atom Ai { self_adjoint, positive, injective, bounded, everywhere_defined }
link inverse Ai A
axiom range Ai = dom(A)
axiom meet dom(A) dom(B) = trivial
axiom dense dom(A)
axiom dense dom(B)
"""

LEMMA_FACTS = """\
# Unbounded self-adjoint pair whose two composition orders both have
# trivial domain; both operators are injective with unbounded inverses.
atom P { self_adjoint, unbounded, injective }
atom Q { self_adjoint, unbounded, injective }
axiom dom(P * Q) = trivial
axiom dom(Q * P) = trivial
axiom dense dom(P)
axiom dense dom(Q)
"""

PRODUCT_PAIR_FACTS = """\
# Self-adjoint pair with trivial product domain in one order only; the
# reversed order recovers the unbounded factor's dense domain.  The second
# factor is bounded and everywhere defined.
atom A { self_adjoint, positive, injective, unbounded }
atom B { self_adjoint, positive, injective, bounded, everywhere_defined }
axiom dom(A * B) = trivial
axiom dom(B * A) = dom(A)
axiom dense dom(A)
"""


@dataclass(frozen=True)
class Expectation:
    """One expected verdict: ``expr`` (by name), raised to ``power``,
    optionally on the adjoint side."""

    expr: str
    power: int
    adjoint: bool
    verdict: Verdict
    claim: str

    def label(self) -> str:
        base = f"{self.expr}'" if self.adjoint else self.expr
        if self.adjoint and self.power > 1:
            base = f"({base})"
        return base if self.power == 1 else f"{base}^{self.power}"


@dataclass(frozen=True)
class Scenario:
    name: str
    facts: FactBase
    named_exprs: dict[str, OpExpr]
    expected: tuple[Expectation, ...]

    def expectation_expr(self, exp: Expectation) -> OpExpr:
        e = self.named_exprs[exp.expr]
        if exp.adjoint:
            e = Adjoint(e)
        if exp.power > 1:
            e = Power(e, exp.power)
        return e


@dataclass
class ReportRow:
    judgment: str
    claim: str
    expected: Verdict
    derived: Verdict
    match: bool
    derivation: Derivation


@dataclass
class Report:
    scenario: str
    rows: list[ReportRow]

    @property
    def passed(self) -> bool:
        return all(r.match for r in self.rows)

    def to_text(self) -> str:
        width = max((len(r.judgment) for r in self.rows), default=8)
        lines = [f"scenario {self.scenario}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.rows:
            mark = "ok  " if r.match else "FAIL"
            lines.append(
                f"  {mark} dom({r.judgment:<{width}})  expected {r.expected.value:<10}"
                f" derived {r.derived.value:<10} {r.claim}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "rows": [
                {
                    "judgment": r.judgment,
                    "claim": r.claim,
                    "expected": r.expected.value,
                    "derived": r.derived.value,
                    "match": r.match,
                    "derivation": r.derivation.conclusion,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


# ---------------------------------------------------------------------------
# Scenario builders


def _kosaki() -> Scenario:
    facts = load_facts(KOSAKI_FACTS, "builtin:kosaki")
    from .expr import Compose

    b_ai = Compose(Atom("B"), Atom("Ai"))
    ai_b = Compose(Atom("Ai"), Atom("B"))
    return Scenario(
        "kosaki",
        facts,
        {"BAi": b_ai, "AiB": ai_b},
        (
            Expectation(
                "BAi", 1, False, Verdict.TRIVIAL,
                "this composition order leaves only the zero vector",
            ),
            Expectation(
                "AiB", 1, False, Verdict.DENSE,
                "the reversed order keeps the dense domain of B",
            ),
        ),
    )


def _adjoint_trivial() -> Scenario:
    facts = load_facts(KOSAKI_FACTS, "builtin:adjoint-trivial")
    from .expr import Compose

    t = Compose(Atom("Ai"), Atom("B"))
    return Scenario(
        "adjoint-trivial",
        facts,
        {"T": t, "TT*": Compose(t, Adjoint(t)), "T*T": Compose(Adjoint(t), t)},
        (
            Expectation("T", 1, False, Verdict.DENSE, "T is densely defined"),
            Expectation("T", 1, True, Verdict.TRIVIAL, "the adjoint has trivial domain"),
            Expectation("T", 2, False, Verdict.TRIVIAL, "the square has trivial domain"),
            Expectation("TT*", 1, False, Verdict.TRIVIAL, "T after T' has trivial domain"),
            Expectation("T*T", 1, False, Verdict.TRIVIAL, "T' after T has trivial domain"),
        ),
    )


def _cube() -> Scenario:
    facts = load_facts(PRODUCT_PAIR_FACTS, "builtin:cube")
    t = offdiag(Atom("A"), Atom("B"), facts.atoms)
    return Scenario(
        "cube",
        facts,
        {"T": t},
        (
            Expectation("T", 1, False, Verdict.DENSE, "T is densely defined"),
            Expectation("T", 2, False, Verdict.NONTRIVIAL, "the square keeps a dense component"),
            Expectation("T", 3, False, Verdict.TRIVIAL, "the cube has trivial domain"),
            Expectation("T", 1, True, Verdict.DENSE, "T' is densely defined"),
            Expectation("T", 2, True, Verdict.NONTRIVIAL, "the adjoint square stays nonzero"),
            Expectation("T", 3, True, Verdict.TRIVIAL, "the adjoint cube has trivial domain"),
        ),
    )


def _fourth() -> Scenario:
    facts = load_facts(LEMMA_FACTS, "builtin:fourth")
    c = diag(Atom("P"), Atom("Q"), facts.atoms)
    t = offdiag(c, swap(BASE), facts.atoms)
    return Scenario(
        "fourth",
        facts,
        {"T": t},
        (
            Expectation("T", 1, False, Verdict.DENSE, "T is densely defined"),
            Expectation("T", 2, False, Verdict.NONTRIVIAL, "the square keeps dense components"),
            Expectation("T", 3, False, Verdict.NONTRIVIAL, "the cube keeps dense components"),
            Expectation("T", 4, False, Verdict.TRIVIAL, "the fourth power collapses to {0}"),
            Expectation("T", 2, True, Verdict.NONTRIVIAL, "the adjoint square stays nonzero"),
            Expectation("T", 3, True, Verdict.NONTRIVIAL, "the adjoint cube stays nonzero"),
            Expectation("T", 4, True, Verdict.TRIVIAL, "the adjoint fourth power is {0}"),
        ),
    )


def _sixth() -> Scenario:
    facts = load_facts(PRODUCT_PAIR_FACTS, "builtin:sixth")
    c = diag(Atom("B"), Atom("A"), facts.atoms)
    t = offdiag(c, swap(BASE), facts.atoms)
    return Scenario(
        "sixth",
        facts,
        {"T": t},
        (
            Expectation("T", 1, False, Verdict.DENSE, "T is densely defined"),
            Expectation("T", 5, False, Verdict.NONTRIVIAL, "the fifth power keeps a dense component"),
            Expectation("T", 6, False, Verdict.TRIVIAL, "the sixth power collapses to {0}"),
            Expectation("T", 5, True, Verdict.NONTRIVIAL, "the adjoint fifth power stays nonzero"),
            Expectation("T", 6, True, Verdict.TRIVIAL, "the adjoint sixth power is {0}"),
        ),
    )


_SCENARIOS = {
    "kosaki": _kosaki,
    "adjoint-trivial": _adjoint_trivial,
    "cube": _cube,
    "fourth": _fourth,
    "sixth": _sixth,
}

SCENARIO_NAMES = tuple(_SCENARIOS)


def scenario(name: str) -> Scenario:
    builder = _SCENARIOS.get(name)
    if builder is None:
        raise UnknownScenario(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}"
        )
    return builder()


# ---------------------------------------------------------------------------
# Nested construction

MAX_NESTED = 10


def nested_construction(n: int) -> tuple[FactBase, OpExpr]:
    """The inductive doubling: level 1 is ``[0, P; Q, 0]`` over the lemma
    pair; each step factors the previous off-diagonal block ``T`` as
    ``diag(entries) * swap`` and returns ``[0, diag(entries); swap, 0]`` on
    the doubled space.  Level ``n`` lives on ``2^n`` base components and
    has trivial domain exactly from power ``2^n`` on.
    """
    if not 1 <= n <= MAX_NESTED:
        raise OutOfRange(f"nested level must lie in 1..{MAX_NESTED}")
    facts = load_facts(LEMMA_FACTS, f"builtin:nested:{n}")
    t = offdiag(Atom("P"), Atom("Q"), facts.atoms)
    for _ in range(n - 1):
        c = diag(t.e12, t.e21, facts.atoms)
        t = offdiag(c, swap(shape_of(t.e12, facts.atoms)), facts.atoms)
    flat = normalize(t, facts.atoms)
    if flat != _nested_flat(n):
        raise RuntimeError("nested construction disagrees with its flat form")
    return facts, t


def _nested_flat(n: int) -> MonomialMatrix:
    # independent arithmetic build of the flattened matrix, used as a
    # cross-check of the block flattening path
    col = [1, 0]
    chains = [(Factor("P"),), (Factor("Q"),)]
    for _ in range(n - 1):
        d = len(col)
        half = d // 2
        new_col = []
        new_chains = []
        for r in range(d):  # diag(top-right, bottom-left) reads shifted columns
            shift = -half if r < half else half
            new_col.append(d + col[r] + shift)
            new_chains.append(chains[r])
        for r in range(d):  # the swap block exchanges the two halves
            new_col.append((r + half) % d)
            new_chains.append(())
        col, chains = new_col, new_chains
    level = len(col).bit_length() - 1
    return MonomialMatrix(len(col), tuple(col), tuple(chains), shape_of_level(level))


def _nested_scenario(n: int) -> Scenario:
    facts, t = nested_construction(n)
    p = 1 << n
    rows = []
    for adjoint in (False, True):
        side = "adjoint " if adjoint else ""
        rows.append(
            Expectation(
                "T", p - 1, adjoint, Verdict.NONTRIVIAL,
                f"the {side}power {p - 1} stays nonzero",
            )
        )
        rows.append(
            Expectation(
                "T", p, adjoint, Verdict.TRIVIAL,
                f"the {side}power {p} collapses to {{0}}",
            )
        )
    return Scenario(f"nested:{n}", facts, {"T": t}, tuple(rows))


# ---------------------------------------------------------------------------
# Running propositions


def run_proposition(name: str) -> Report:
    """Evaluate every expected judgment of a scenario (or ``nested:<n>``)."""
    if name.startswith("nested:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise UnknownScenario(f"bad nested level in {name!r}") from exc
        sc = _nested_scenario(n)
    else:
        sc = scenario(name)
    rows = []
    for exp in sc.expected:
        e = sc.expectation_expr(exp)
        try:
            derived, derivation = verdict_of(e, sc.facts)
            match = verdict_satisfies(derived, exp.verdict)
            claim = exp.claim
        except DomcalcError as exc:  # engine errors become failing rows
            derived = Verdict.UNKNOWN
            derivation = Derivation("ERROR", f"evaluation failed: {exc}")
            match = False
            claim = f"{exp.claim} [error: {exc}]"
        rows.append(
            ReportRow(
                judgment=exp.label(),
                claim=claim,
                expected=exp.verdict,
                derived=derived,
                match=match,
                derivation=derivation,
            )
        )
    return Report(sc.name, rows)


def run_all() -> list[Report]:
    return [run_proposition(name) for name in SCENARIO_NAMES]


# ---------------------------------------------------------------------------
# Conjecture bookkeeping


@dataclass(frozen=True)
class ConjectureStatus:
    n: int
    settled_by: str | None

    @property
    def settled(self) -> bool:
        return self.settled_by is not None

    def __str__(self) -> str:
        if self.settled:
            return f"power {self.n}: settled by scenario {self.settled_by}"
        return f"power {self.n}: open"


def conjecture_status(n: int) -> ConjectureStatus:
    """Which catalog scenario exhibits trivial n-th powers below a nonzero
    (n-1)-th power, on both the operator and its adjoint.

    Settled for n in {2, 3, 4, 6} and all powers of two up to 2^10; open
    otherwise (for example n = 5 and n = 7).
    """
    if n < 2:
        raise OutOfRange("the question starts at the second power")
    if n == 3:
        return ConjectureStatus(n, "cube")
    if n == 4:
        return ConjectureStatus(n, "fourth")
    if n == 6:
        return ConjectureStatus(n, "sixth")
    if n & (n - 1) == 0:
        k = n.bit_length() - 1
        if k <= MAX_NESTED:
            return ConjectureStatus(n, f"nested:{k}")
    return ConjectureStatus(n, None)
