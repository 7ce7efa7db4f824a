#!/usr/bin/env python3
"""The domain calculus and its replayable derivations.

The central rule is the domain of a composition:

    dom(X * Y) = { x in dom(Y) : Y x in dom(X) }
               = meet(dom(Y), pre(Y, dom(X)))

Against a fact base (flags, trivial intersections, range facts) the engine
rewrites such sets to a fixpoint and rates the result in the verdict
lattice Unknown < {Trivial, NonTrivial < Dense}.  Every verdict carries a
derivation tree that an independent checker replays rule by rule.
"""

from domcalc import (
    domain_summary,
    load_facts,
    parse_expr,
    set_text,
    verify_derivation,
)

FACTS = """\
# an unbounded self-adjoint positive multiplier A with bounded everywhere
# defined inverse Ai, and a partner B whose domain meets dom(A) only in {0}
atom A  { self_adjoint, positive, injective, unbounded }
atom B  { self_adjoint, positive, injective, unbounded }
atom Ai { self_adjoint, positive, injective, bounded, everywhere_defined }
link inverse Ai A
axiom meet dom(A) dom(B) = trivial
axiom dense dom(A)
axiom dense dom(B)
"""

facts = load_facts(FACTS, "demo")

print("== one composition order collapses, the other stays dense ==")
for text in ("B * Ai", "Ai * B"):
    domain, verdict, _ = domain_summary(parse_expr(text), facts)
    print(f"  dom({text}) = {set_text(domain):12s} verdict: {verdict}")

print()
print("== the full certificate for dom(B * Ai) = {0} ==")
_, _, derivation = domain_summary(parse_expr("B * Ai"), facts)
print(derivation.to_markdown())

print(f"independently re-checked: {verify_derivation(derivation, facts)}")
print()
print("== a square that dies even though the operator is densely defined ==")
for text in ("Ai * B", "(Ai * B)'", "(Ai * B)^2", "(Ai * B)' * (Ai * B)"):
    _, verdict, _ = domain_summary(parse_expr(text), facts)
    print(f"  dom({text:20s}) verdict: {verdict}")
