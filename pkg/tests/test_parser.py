import pytest

from domcalc.errors import ParseError, ShapeMismatch
from domcalc.expr import (
    Atom,
    BASE,
    Block2,
    Compose,
    Identity,
    Inverse,
    Pair,
    Zero,
    shape_of,
)
from domcalc.parser import parse_expr


def test_inverse_times_atom():
    assert parse_expr("A^-1 * B") == Compose(Inverse(Atom("A")), Atom("B"))


def test_composition_is_right_associated():
    e = parse_expr("A * B * C")
    assert e == Compose(Atom("A"), Compose(Atom("B"), Atom("C")))


def test_power_of_block_desugars():
    t = Block2(Zero(BASE), Atom("A"), Atom("B"), Zero(BASE))
    assert parse_expr("[0, A; B, 0]^3") == Compose(Compose(t, t), t)


def test_whitespace_is_insignificant():
    assert parse_expr("A^-1*B") == parse_expr("  A ^-1  *  B ")


def test_missing_block_entry_is_an_arity_error():
    with pytest.raises(ParseError) as err:
        parse_expr("[0, A; B]")
    assert err.value.position is not None


def test_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_expr("A * ?")
    assert err.value.position == 4


@pytest.mark.parametrize("bad", ["A^-2", "A^0", "A *", "(A", "[0, A; B, 0", "2 * A", ""])
def test_malformed_inputs(bad):
    with pytest.raises(ParseError):
        parse_expr(bad)


def test_postfix_order():
    from domcalc.expr import Adjoint

    assert parse_expr("A^-1'") == Adjoint(Inverse(Atom("A")))
    assert parse_expr("A'^-1") == Inverse(Adjoint(Atom("A")))


def test_thousand_random_expressions_round_trip():
    import random

    from domcalc.expr import Adjoint, Compose, pretty_print
    from helpers import random_block_expr, random_facts

    rng = random.Random(1234)
    facts = random_facts(rng)
    names = facts.atoms.ids()
    for _ in range(1000):
        level = rng.randint(0, 2)
        e = random_block_expr(rng, names, level)
        roll = rng.random()
        if roll < 0.3:
            e = Compose(e, random_block_expr(rng, names, level))
        elif roll < 0.5:
            e = Adjoint(e)
        assert parse_expr(pretty_print(e)) == e


class TestShapeInference:
    def test_identity_inside_block_takes_sibling_level(self):
        e = parse_expr("[0, [P, 0; 0, Q]; [0, I; I, 0], 0]")
        assert shape_of(e) == Pair(Pair(BASE, BASE), Pair(BASE, BASE))
        swap = e.e21
        assert swap.e12 == Identity(BASE)

    def test_bare_identity_defaults_to_base(self):
        assert parse_expr("I") == Identity(BASE)
        assert parse_expr("0") == Zero(BASE)

    def test_swap_of_swaps_infers_second_level(self):
        e = parse_expr("[0, [0, I; I, 0]; [0, I; I, 0], 0]")
        inner = e.e12
        assert shape_of(inner) == Pair(BASE, BASE)

    def test_conflicting_levels_rejected(self):
        with pytest.raises(ShapeMismatch):
            parse_expr("A * [0, A; B, 0]")

    def test_zero_adopts_block_entry_level(self):
        e = parse_expr("[0, [0, P; Q, 0]; [0, P; Q, 0], 0]")
        assert e.e11 == Zero(Pair(BASE, BASE))
