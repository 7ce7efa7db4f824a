import dataclasses
import random

import pytest

from domcalc.catalog import run_all, run_proposition, scenario
from domcalc.checker import RULE_NAMES, explain_failure, verify_derivation
from domcalc.cli import export_trace
from domcalc.domains import Derivation, verdict_of
from domcalc.errors import UnverifiedDerivation
from domcalc.parser import parse_expr

from helpers import random_expr, random_facts, tamper_random_node


@pytest.fixture(scope="module")
def catalog_derivations():
    out = []
    for report in run_all():
        sc = report.scenario
        facts = scenario(sc).facts
        for row in report.rows:
            out.append((facts, row.derivation))
    for n in (1, 2, 3):
        report = run_proposition(f"nested:{n}")
        from domcalc.catalog import nested_construction

        facts, _ = nested_construction(n)
        for row in report.rows:
            out.append((facts, row.derivation))
    return out


def test_accepts_every_catalog_derivation(catalog_derivations):
    for facts, derivation in catalog_derivations:
        ok, node, reason = explain_failure(derivation, facts)
        assert ok, f"[{node.rule}] {node.conclusion}: {reason}"


def test_accepts_random_expression_derivations():
    rng = random.Random(17)
    accepted = 0
    for _ in range(60):
        facts = random_facts(rng, dom_axioms=2)
        e = random_expr(rng, facts, level=rng.randint(0, 1))
        try:
            _, derivation = verdict_of(e, facts)
        except Exception:
            continue
        assert verify_derivation(derivation, facts)
        accepted += 1
    assert accepted > 40


def test_rejects_tampered_rule_ids_and_axioms(catalog_derivations):
    rng = random.Random(23)
    rules = tuple(sorted(RULE_NAMES))
    for _ in range(30):
        facts, derivation = rng.choice(catalog_derivations)
        mutated = tamper_random_node(rng, derivation, rules)
        assert mutated != derivation
        assert not verify_derivation(mutated, facts)


def test_rejects_unknown_rule(catalog_derivations):
    facts, derivation = catalog_derivations[0]
    bad = dataclasses.replace(derivation, rule="NO-SUCH-RULE")
    ok, node, reason = explain_failure(bad, facts)
    assert not ok and "unknown rule" in reason


def test_rejects_axiom_missing_from_facts(catalog_derivations):
    facts, _ = catalog_derivations[0]
    fake = Derivation("D-FACT", "dom(Zz * Qq) = trivial", (), ("dom(Zz * Qq) = trivial",))
    assert not verify_derivation(fake, facts)


def test_rejects_edited_conclusion(catalog_derivations):
    for facts, derivation in catalog_derivations:
        if derivation.conclusion.endswith("Trivial"):
            bad = dataclasses.replace(
                derivation, conclusion=derivation.conclusion.replace("Trivial", "Dense")
            )
            assert not verify_derivation(bad, facts)
            return
    pytest.fail("no trivial-verdict derivation found")


def test_explain_failure_points_at_the_node(catalog_derivations):
    facts, derivation = catalog_derivations[0]
    target = derivation.premises[1]
    bad_child = dataclasses.replace(target, rule="SV-WHOLE")
    bad = dataclasses.replace(
        derivation, premises=(derivation.premises[0], bad_child)
    )
    ok, node, _ = explain_failure(bad, facts)
    assert not ok and node is not None


class TestExportTrace:
    def test_identical_bytes_for_identical_inputs(self):
        sc = scenario("cube")
        _, derivation = verdict_of(parse_expr("[0, A; B, 0]^3"), sc.facts)
        one = export_trace(derivation, "json", sc.facts)
        two = export_trace(derivation, "json", sc.facts)
        assert one == two
        assert export_trace(derivation, "md", sc.facts) == export_trace(
            derivation, "md", sc.facts
        )

    def test_empty_derivation_is_rejected(self):
        sc = scenario("kosaki")
        with pytest.raises(UnverifiedDerivation):
            export_trace(None, "json", sc.facts)
        with pytest.raises(UnverifiedDerivation):
            export_trace(Derivation("", ""), "json", sc.facts)

    def test_tampered_derivation_is_rejected(self):
        sc = scenario("kosaki")
        _, derivation = verdict_of(parse_expr("B * Ai"), sc.facts)
        bad = dataclasses.replace(derivation, rule="V-NF")
        with pytest.raises(UnverifiedDerivation):
            export_trace(bad, "json", sc.facts)

    def test_cube_trace_cites_the_product_axiom(self):
        sc = scenario("cube")
        _, derivation = verdict_of(parse_expr("[0, A; B, 0]^3"), sc.facts)
        blob = export_trace(derivation, "json", sc.facts)
        assert "dom(A * B) = trivial" in blob
