import random
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from domcalc.errors import NonNormalizable, ShapeMismatch
from domcalc.expr import (
    Adjoint,
    Atom,
    AtomDecl,
    AtomTable,
    BASE,
    Block2,
    Compose,
    Identity,
    Inverse,
    Pair,
    Power,
    Zero,
    diag,
    offdiag,
    shape_of,
    swap,
)
from domcalc.normalize import (
    Factor,
    MonomialMatrix,
    ZeroBlock,
    compose_blocks,
    expand_power,
    identity_matrix,
    nf_shape,
    normalize,
    push_adjoint,
    scalar_matrix,
)
from domcalc.parser import parse_expr

from helpers import random_facts, random_monomial


def sa_atoms(*names):
    table = AtomTable()
    for n in names:
        table.declare(AtomDecl.make(n, {"self_adjoint", "unbounded", "injective"}))
    return table


def offdiag_mono(a: str, b: str) -> MonomialMatrix:
    return MonomialMatrix(2, (1, 0), ((Factor(a),), (Factor(b),)), Pair(BASE, BASE))


def diag_mono(a: str, b: str) -> MonomialMatrix:
    return MonomialMatrix(2, (0, 1), ((Factor(a),), (Factor(b),)), Pair(BASE, BASE))


SWAP_MONO = MonomialMatrix(2, (1, 0), ((), ()), Pair(BASE, BASE))


class TestComposeBlocks:
    def test_offdiag_squared_is_diagonal(self):
        t = offdiag_mono("A", "B")
        square = compose_blocks(t, t)
        assert square == MonomialMatrix(
            2, (0, 1), ((Factor("A"), Factor("B")), (Factor("B"), Factor("A"))), t.shape
        )

    def test_diagonal_after_swap_moves_off_diagonal(self):
        out = compose_blocks(diag_mono("B", "A"), SWAP_MONO)
        assert out == MonomialMatrix(
            2, (1, 0), ((Factor("B"),), (Factor("A"),)), SWAP_MONO.shape
        )

    def test_identity_is_a_unit(self):
        m = offdiag_mono("A", "B")
        assert compose_blocks(m, identity_matrix(1)) == m
        assert compose_blocks(identity_matrix(1), m) == m

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatch):
            compose_blocks(offdiag_mono("A", "B"), identity_matrix(2))


class TestExpandPower:
    def test_cube_of_offdiag(self):
        cube = expand_power(offdiag_mono("A", "B"), 3)
        assert cube == MonomialMatrix(
            2,
            (1, 0),
            ((Factor("A"), Factor("B"), Factor("A")), (Factor("B"), Factor("A"), Factor("B"))),
            Pair(BASE, BASE),
        )

    def test_square_of_block_of_blocks(self):
        atoms = sa_atoms("P", "Q")
        t = offdiag(diag(Atom("P"), Atom("Q")), swap(BASE), atoms)
        square = expand_power(t, 2, atoms)
        assert isinstance(square, MonomialMatrix)
        assert square.dim == 4
        assert square.col_of_row == (1, 0, 3, 2)

    def test_matches_fold_of_compose_blocks(self):
        rng = random.Random(7)
        facts = random_facts(rng)
        names = facts.atoms.ids()
        m = random_monomial(rng, names, 4)
        folded = reduce(compose_blocks, [m] * 16)
        assert expand_power(m, 16) == folded

    def test_power_of_zero_stays_zero(self):
        assert expand_power(ZeroBlock(BASE), 5) == ZeroBlock(BASE)

    def test_chain_power(self):
        assert expand_power((Factor("A"),), 3) == (Factor("A"),) * 3


@settings(max_examples=25)
@given(st.integers(1, 16), st.data())
def test_parity_law(k, data):
    # even powers of [0, P; Q, 0] are diag((PQ)^k, (QP)^k); odd powers append
    # one more off-diagonal letter
    t = offdiag_mono("P", "Q")
    pq, qp = (Factor("P"), Factor("Q")), (Factor("Q"), Factor("P"))
    even = expand_power(t, 2 * k)
    assert even == MonomialMatrix(2, (0, 1), (pq * k, qp * k), t.shape)
    odd = expand_power(t, 2 * k + 1)
    assert odd == MonomialMatrix(
        2, (1, 0), (pq * k + (Factor("P"),), qp * k + (Factor("Q"),)), t.shape
    )


class TestPushAdjoint:
    def test_offdiag_of_self_adjoints(self):
        atoms = sa_atoms("A", "B")
        t = offdiag(Atom("A"), Atom("B"), atoms)
        assert push_adjoint(Adjoint(t), atoms) == offdiag(Atom("B"), Atom("A"), atoms)

    def test_bounded_factor_reverses_composition(self):
        table = AtomTable()
        table.declare(
            AtomDecl.make("Ai", {"self_adjoint", "injective", "bounded", "everywhere_defined"})
        )
        table.declare(AtomDecl.make("B", {"self_adjoint", "unbounded", "injective"}))
        e = Adjoint(Compose(Atom("Ai"), Atom("B")))
        assert push_adjoint(e, table) == Compose(Atom("B"), Atom("Ai"))

    def test_double_adjoint_collapses_on_closed_densely_defined(self):
        atoms = sa_atoms("A", "B")
        t = offdiag(Atom("A"), Atom("B"), atoms)
        assert push_adjoint(Adjoint(Adjoint(t)), atoms) == t

    def test_unbounded_composition_stays_symbolic(self):
        atoms = sa_atoms("A", "B")
        e = Adjoint(Compose(Atom("A"), Atom("B")))
        assert push_adjoint(e, atoms) == e

    def test_diag_of_self_adjoint_blocks_collapses(self):
        atoms = sa_atoms("P", "Q")
        c = diag(Atom("P"), Atom("Q"))
        t = offdiag(c, swap(BASE), atoms)
        pushed = push_adjoint(Adjoint(t), atoms)
        assert pushed == offdiag(swap(BASE), c, atoms)

    def test_double_adjoint_preserves_normal_forms_across_the_catalog(self):
        # involution at the normal-form level wherever every premise held
        from domcalc.catalog import scenario

        for name in ("cube", "fourth", "sixth"):
            sc = scenario(name)
            t = sc.named_exprs["T"]
            assert normalize(Adjoint(Adjoint(t)), sc.facts.atoms) == normalize(
                t, sc.facts.atoms
            )


class TestNormalize:
    def test_idempotent(self):
        rng = random.Random(11)
        facts = random_facts(rng)
        for _ in range(30):
            m = random_monomial(rng, facts.atoms.ids(), 4)
            assert normalize(m, facts.atoms) == m

    def test_association_does_not_matter(self):
        atoms = sa_atoms("A", "B", "C")
        left = Compose(Compose(Atom("A"), Atom("B")), Atom("C"))
        right = Compose(Atom("A"), Compose(Atom("B"), Atom("C")))
        assert normalize(left, atoms) == normalize(right, atoms)

    def test_identity_is_unit(self):
        atoms = sa_atoms("A")
        assert normalize(Compose(Identity(BASE), Atom("A")), atoms) == (Factor("A"),)

    def test_identity_on_paired_space_is_the_identity_matrix(self):
        assert normalize(Identity(Pair(BASE, BASE))) == identity_matrix(1)

    def test_linked_inverse_canonicalizes_to_the_partner_atom(self):
        table = AtomTable()
        table.declare(AtomDecl.make("A", {"self_adjoint", "unbounded", "injective"}))
        table.declare(
            AtomDecl.make("Ai", {"self_adjoint", "injective", "bounded", "everywhere_defined"})
        )
        table.link_inverse("Ai", "A")
        assert normalize(Inverse(Atom("A")), table) == (Factor("Ai"),)
        assert normalize(Inverse(Atom("Ai")), table) == (Factor("A"),)

    def test_unlinked_inverse_keeps_the_marker(self):
        atoms = sa_atoms("A")
        assert normalize(Inverse(Atom("A")), atoms) == (Factor("A", inverse=True),)
        assert normalize(Inverse(Inverse(Atom("A"))), atoms) == (Factor("A"),)

    def test_adjoint_marker_on_non_self_adjoint_atom(self):
        table = AtomTable()
        table.declare(AtomDecl.make("T", {"closed", "densely_defined"}))
        assert normalize(Adjoint(Atom("T")), table) == (Factor("T", adjoint=True),)
        # and the double adjoint collapses because T is closed and densely defined
        assert normalize(Adjoint(Adjoint(Atom("T"))), table) == (Factor("T"),)

    def test_nested_power_matches_explicit_multiplications(self):
        atoms = sa_atoms("P", "Q")
        t = offdiag(diag(Atom("P"), Atom("Q")), swap(BASE), atoms)
        base = normalize(t, atoms)
        folded = reduce(compose_blocks, [base] * 8)
        assert normalize(Power(t, 8), atoms) == folded

    def test_full_block_needs_a_sum(self):
        atoms = sa_atoms("A", "B")
        with pytest.raises(NonNormalizable):
            normalize(Block2(Atom("A"), Atom("B"), Atom("B"), Atom("A")), atoms)

    def test_zero_row_is_rejected(self):
        atoms = sa_atoms("A")
        with pytest.raises(NonNormalizable):
            normalize(Block2(Atom("A"), Zero(BASE), Atom("A"), Zero(BASE)), atoms)

    def test_zero_operator_normal_form(self):
        assert normalize(Zero(BASE)) == ZeroBlock(BASE)
        with pytest.raises(NonNormalizable):
            normalize(Compose(Zero(BASE), Atom("A")), sa_atoms("A"))

    def test_shape_is_stable_under_normalization(self):
        rng = random.Random(3)
        facts = random_facts(rng)
        from helpers import random_block_expr

        for _ in range(40):
            e = random_block_expr(rng, facts.atoms.ids(), rng.randint(0, 2))
            assert shape_of(e, facts.atoms) == nf_shape(normalize(e, facts.atoms))

    def test_scalar_matrix_view(self):
        chain = (Factor("A"),)
        assert scalar_matrix(chain).chains == (chain,)


class TestAdjointAlgebraNumericOracle:
    """Finite-dimensional stand-ins where every operator is everywhere
    defined: matrix adjoints obey the identities the rewriter relies on."""

    def test_reversal_and_block_exchange(self):
        rng = np.random.default_rng(2024)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            d = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            assert np.allclose((x @ d).conj().T, d.conj().T @ x.conj().T, atol=1e-12)
            zero = np.zeros((n, n))
            t = np.block([[zero, x], [d, zero]])
            t_adj = np.block([[zero, d.conj().T], [x.conj().T, zero]])
            assert np.allclose(t.conj().T, t_adj, atol=1e-12)


def test_normalize_of_parsed_matches_constructed():
    atoms = sa_atoms("A", "B")
    assert normalize(parse_expr("[0, A; B, 0]^2"), atoms) == expand_power(
        offdiag_mono("A", "B"), 2
    )
