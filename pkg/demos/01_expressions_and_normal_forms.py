#!/usr/bin/env python3
"""Expressions, the DSL, and monomial normal forms.

Operators are built from named atoms with declared properties.  A block
expression whose rows and columns each hold one nonzero entry normalizes to
a permutation of scalar composition chains, and formal products of such
matrices are exact: no sums of unbounded operators ever appear.
"""

from domcalc import (
    Atom,
    AtomDecl,
    AtomTable,
    BASE,
    Power,
    diag,
    expand_power,
    normalize,
    offdiag,
    parse_expr,
    pretty_print,
    swap,
)
from domcalc.normalize import mono_text

atoms = AtomTable()
atoms.declare(AtomDecl.make("A", {"self_adjoint", "positive", "injective", "unbounded"}))
atoms.declare(AtomDecl.make("B", {"self_adjoint", "positive", "injective", "unbounded"}))

print("== the surface syntax ==")
for text in ("A^-1 * B", "[0, A; B, 0]", "[0, A; B, 0]'", "[0, A; B, 0]^3"):
    e = parse_expr(text)
    print(f"  {text:22s} parses to {pretty_print(e)}")

print()
print("== normal forms of powers of T = [0, A; B, 0] ==")
t = offdiag(Atom("A"), Atom("B"), atoms)
for k in range(1, 5):
    nf = normalize(Power(t, k) if k > 1 else t, atoms)
    print(f"  T^{k} = {mono_text(nf)}")
print("  (even powers are diagonal, odd powers off-diagonal: the two")
print("   composition orders AB and BA alternate through the block.)")

print()
print("== doubling: T = [0, C; S, 0] with C = diag(A, B), S the swap ==")
t2 = offdiag(diag(Atom("A"), Atom("B")), swap(BASE), atoms)
for k in (1, 2, 3, 4):
    nf = expand_power(t2, k, atoms)
    print(f"  T^{k} = {mono_text(nf)}")
print("  The fourth power is diagonal with every chain a two-letter word;")
print("  squaring a construction doubles the power at which words appear.")
