"""Shared random generators for the property and acceptance tests."""

from __future__ import annotations

import random

from domcalc.expr import (
    Adjoint,
    AtomDecl,
    Compose,
    OpExpr,
    Power,
    diag,
    offdiag,
    shape_of_level,
)
from domcalc.domains import FactBase
from domcalc.normalize import Chain, Factor, MonomialMatrix, chain_expr

# valid, implication-closed flag sets spanning the declaration space
FLAG_TEMPLATES = (
    {"self_adjoint", "positive", "injective", "unbounded"},
    {"self_adjoint", "unbounded"},
    {"self_adjoint", "injective", "bounded", "everywhere_defined"},
    {"bounded", "everywhere_defined"},
    {"closed", "densely_defined", "injective"},
    {"closed", "densely_defined"},
)


def random_facts(rng: random.Random, count: int = 6, dom_axioms: int = 0) -> FactBase:
    """A fact base over ``count`` random atoms, optionally with a few
    trivial-domain axioms over random two-factor chains.

    Fabricated axioms must stay satisfiable alongside the declared flags: a
    composition whose outer factor is everywhere defined has the inner
    factor's (possibly dense) domain, so only chains headed by a
    not-everywhere-defined atom may be declared trivial.
    """
    facts = FactBase()
    names = []
    for i in range(count):
        name = f"a{i}"
        facts.atoms.declare(AtomDecl.make(name, rng.choice(FLAG_TEMPLATES)))
        names.append(name)
    narrow = [n for n in names if not facts.atoms.get(n).has("everywhere_defined")]
    for _ in range(dom_axioms):
        if not narrow:
            break
        chain = (Factor(rng.choice(narrow)), Factor(rng.choice(names)))
        from domcalc.domains import TRIVIAL

        facts.add_dom_axiom(chain, TRIVIAL, "test")
    return facts


def atom_names(facts: FactBase) -> list[str]:
    return facts.atoms.ids()


def random_chain(rng: random.Random, names: list[str], max_len: int = 3) -> Chain:
    out = []
    for _ in range(rng.randint(0, max_len)):
        out.append(Factor(rng.choice(names), inverse=rng.random() < 0.2))
    return tuple(out)


def random_monomial(
    rng: random.Random, names: list[str], dim: int, max_len: int = 3
) -> MonomialMatrix:
    perm = list(range(dim))
    rng.shuffle(perm)
    chains = tuple(random_chain(rng, names, max_len) for _ in range(dim))
    level = dim.bit_length() - 1
    return MonomialMatrix(dim, tuple(perm), chains, shape_of_level(level))


def random_block_expr(rng: random.Random, names: list[str], level: int) -> OpExpr:
    """A block expression whose normal form is monomial by construction."""
    if level == 0:
        chain = random_chain(rng, names, 2)
        if not chain:
            chain = (Factor(rng.choice(names)),)
        return chain_expr(chain)
    left = random_block_expr(rng, names, level - 1)
    right = random_block_expr(rng, names, level - 1)
    if rng.random() < 0.5:
        return diag(left, right)
    return offdiag(left, right)


def random_expr(rng: random.Random, facts: FactBase, level: int = 1) -> OpExpr:
    """Monomial block expression with optional powers, composition and a
    sparing use of adjoints (most draws normalize; a few stay symbolic)."""
    names = atom_names(facts)
    e: OpExpr = random_block_expr(rng, names, level)
    for _ in range(rng.randint(0, 2)):
        roll = rng.random()
        if roll < 0.45:
            e = Compose(e, random_block_expr(rng, names, level))
        elif roll < 0.85:
            e = Power(e, rng.randint(2, 4))
        else:
            e = Adjoint(e)
    return e


def tamper_random_node(rng: random.Random, derivation, rules: tuple[str, ...]):
    """Return a copy of the derivation with one random node corrupted:
    either its rule id is replaced or its axiom citations are garbled."""
    import dataclasses

    nodes = []

    def collect(node, path):
        nodes.append((node, path))
        for i, p in enumerate(node.premises):
            collect(p, path + (i,))

    collect(derivation, ())
    node, path = rng.choice(nodes)
    if rng.random() < 0.5:
        new_rule = rng.choice([r for r in rules if r != node.rule])
        mutated = dataclasses.replace(node, rule=new_rule)
    else:
        bogus = ("dom(Zz * Qq) = trivial",)
        new_axioms = bogus if not node.axioms else (node.axioms[0] + " GARBLED",)
        mutated = dataclasses.replace(node, axioms=new_axioms)
    return _replace_at(derivation, path, mutated)


def _replace_at(node, path, replacement):
    import dataclasses

    if not path:
        return replacement
    i = path[0]
    child = _replace_at(node.premises[i], path[1:], replacement)
    premises = node.premises[:i] + (child,) + node.premises[i + 1:]
    return dataclasses.replace(node, premises=premises)
