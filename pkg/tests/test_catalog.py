import json

import pytest

from domcalc.catalog import (
    ConjectureStatus,
    conjecture_status,
    nested_construction,
    run_all,
    run_proposition,
    scenario,
)
from domcalc.errors import OutOfRange, UnknownScenario
from domcalc.expr import Adjoint, Atom, Power, offdiag
from domcalc.domains import Verdict, verdict_of, verdict_satisfies
from domcalc.normalize import normalize


class TestScenarioTables:
    def test_kosaki_expected_rows(self):
        sc = scenario("kosaki")
        table = {(e.expr, e.power, e.adjoint): e.verdict for e in sc.expected}
        assert table[("BAi", 1, False)] is Verdict.TRIVIAL
        assert table[("AiB", 1, False)] is Verdict.DENSE

    def test_cube_expects_nontrivial_square(self):
        sc = scenario("cube")
        table = {(e.expr, e.power, e.adjoint): e.verdict for e in sc.expected}
        assert table[("T", 2, False)] is Verdict.NONTRIVIAL
        assert table[("T", 3, True)] is Verdict.TRIVIAL

    def test_fourth_expects_nontrivial_cube(self):
        sc = scenario("fourth")
        table = {(e.expr, e.power, e.adjoint): e.verdict for e in sc.expected}
        assert table[("T", 3, False)] is Verdict.NONTRIVIAL
        assert table[("T", 4, False)] is Verdict.TRIVIAL

    def test_sixth_expects_fifth_and_sixth_powers(self):
        sc = scenario("sixth")
        table = {(e.expr, e.power, e.adjoint): e.verdict for e in sc.expected}
        assert table[("T", 5, False)] is Verdict.NONTRIVIAL
        assert table[("T", 6, False)] is Verdict.TRIVIAL

    def test_every_expectation_carries_a_claim(self):
        for name in ("kosaki", "adjoint-trivial", "cube", "fourth", "sixth"):
            for e in scenario(name).expected:
                assert e.claim

    def test_unknown_scenario(self):
        with pytest.raises(UnknownScenario):
            scenario("septieme")


class TestRunProposition:
    def test_adjoint_trivial_passes_with_five_rows(self):
        report = run_proposition("adjoint-trivial")
        assert report.passed and len(report.rows) == 5

    def test_cube_passes_with_six_rows_including_adjoints(self):
        report = run_proposition("cube")
        assert report.passed and len(report.rows) == 6
        assert any("T'" in row.judgment for row in report.rows)

    def test_all_scenarios_pass(self):
        for report in run_all():
            assert report.passed, report.to_text()

    def test_nested_five_checks_powers_31_and_32(self):
        report = run_proposition("nested:5")
        assert report.passed
        judged = {row.judgment for row in report.rows}
        assert {"T^31", "T^32", "(T')^31", "(T')^32"} <= judged

    def test_report_serialization(self):
        report = run_proposition("kosaki")
        data = json.loads(report.to_json())
        assert data["scenario"] == "kosaki" and data["passed"] is True
        assert "PASS" in report.to_text()

    def test_bad_nested_name(self):
        with pytest.raises(UnknownScenario):
            run_proposition("nested:x")

    def test_engine_errors_become_failing_rows(self, monkeypatch):
        import domcalc.catalog as catalog
        from domcalc.errors import NonNormalizable

        def boom(e, facts):
            raise NonNormalizable("synthetic failure")

        monkeypatch.setattr(catalog, "verdict_of", boom)
        report = run_proposition("kosaki")
        assert not report.passed
        assert all("synthetic failure" in row.claim for row in report.rows)


class TestSixthNormalForms:
    def test_fifth_power_flattens_to_two_letter_words(self):
        # T^5 in the sixth construction: two diagonal-block chains of three
        # letters (trivial) and an off-diagonal pair of two-letter words,
        # one of which keeps the dense domain of A
        from domcalc.normalize import Factor, mono_text
        from domcalc.expr import Power

        sc = scenario("sixth")
        nf = normalize(Power(sc.named_exprs["T"], 5), sc.facts.atoms)
        assert nf.dim == 4
        a, b = Factor("A"), Factor("B")
        per_column = {c: nf.column_chain(c) for c in range(4)}
        assert per_column[0] == (b, a)        # reads dom(A): stays dense
        assert per_column[1] == (a, b)        # trivial by the product axiom
        assert {per_column[2], per_column[3]} == {(a, b, a), (b, a, b)}
        assert mono_text(nf).startswith("mono(4;")


class TestNestedConstruction:
    def test_level_one_is_the_lemma_block(self):
        facts, t = nested_construction(1)
        assert t == offdiag(Atom("P"), Atom("Q"), facts.atoms)
        v1, _ = verdict_of(t, facts)
        v2, _ = verdict_of(Power(t, 2), facts)
        assert verdict_satisfies(v1, Verdict.NONTRIVIAL)
        assert v2 is Verdict.TRIVIAL

    def test_level_two_equals_the_fourth_power_construction(self):
        facts, t = nested_construction(2)
        sc = scenario("fourth")
        assert normalize(t, facts.atoms) == normalize(
            sc.named_exprs["T"], sc.facts.atoms
        )

    def test_level_three_powers(self):
        facts, t = nested_construction(3)
        v7, _ = verdict_of(Power(t, 7), facts)
        v8, _ = verdict_of(Power(t, 8), facts)
        assert v7 is Verdict.NONTRIVIAL and v8 is Verdict.TRIVIAL

    def test_level_three_eighth_power_matches_explicit_multiplications(self):
        from functools import reduce

        from domcalc.normalize import compose_blocks

        facts, t = nested_construction(3)
        base = normalize(t, facts.atoms)
        assert normalize(Power(t, 8), facts.atoms) == reduce(
            compose_blocks, [base] * 8
        )

    @pytest.mark.parametrize("bad", [0, -1, 11])
    def test_out_of_range_levels(self, bad):
        with pytest.raises(OutOfRange):
            nested_construction(bad)

    def test_monotone_powers_up_to_the_threshold(self):
        # powers below 2^n never collapse; powers from 2^n on always do
        for n in (1, 2, 3, 4):
            facts, t = nested_construction(n)
            cut = 1 << n
            for p in range(1, cut + 3):
                v, _ = verdict_of(Power(t, p) if p > 1 else t, facts)
                if p >= cut:
                    assert v is Verdict.TRIVIAL, (n, p, v)
                else:
                    assert v is not Verdict.TRIVIAL, (n, p, v)
                    if p == cut - 1:
                        assert v in (Verdict.NONTRIVIAL, Verdict.DENSE)

    def test_adjoint_side_mirrors_the_primal_side(self):
        for n in (1, 2, 3):
            facts, t = nested_construction(n)
            cut = 1 << n
            for p in (cut - 1, cut):
                vp, _ = verdict_of(Power(t, p) if p > 1 else t, facts)
                va, _ = verdict_of(
                    Power(Adjoint(t), p) if p > 1 else Adjoint(t), facts
                )
                assert (vp is Verdict.TRIVIAL) == (va is Verdict.TRIVIAL)


class TestMonotonicity:
    def test_scenario_power_ladders_are_consistent(self):
        # dom(T^m) is contained in dom(T^n) for m >= n, so a definite
        # NonTrivial above forbids Trivial below and vice versa
        for name in ("cube", "fourth", "sixth"):
            sc = scenario(name)
            t = sc.named_exprs["T"]
            ladder = []
            for p in range(1, 9):
                v, _ = verdict_of(Power(t, p) if p > 1 else t, sc.facts)
                ladder.append(v)
            for low in range(len(ladder)):
                for high in range(low, len(ladder)):
                    if ladder[high] in (Verdict.NONTRIVIAL, Verdict.DENSE):
                        assert ladder[low] is not Verdict.TRIVIAL
                    if ladder[low] is Verdict.TRIVIAL:
                        assert ladder[high] not in (Verdict.NONTRIVIAL, Verdict.DENSE)


class TestConjectureStatus:
    def test_examples(self):
        assert conjecture_status(4) == ConjectureStatus(4, "fourth")
        assert conjecture_status(5) == ConjectureStatus(5, None)
        assert conjecture_status(8) == ConjectureStatus(8, "nested:3")
        assert conjecture_status(2) == ConjectureStatus(2, "nested:1")
        assert conjecture_status(3).settled_by == "cube"
        assert conjecture_status(6).settled_by == "sixth"

    def test_large_powers_of_two(self):
        assert conjecture_status(1024).settled_by == "nested:10"
        assert not conjecture_status(2048).settled

    def test_odd_cases_are_open(self):
        for n in (5, 7, 9, 11, 12, 100):
            assert not conjecture_status(n).settled

    def test_below_two_is_out_of_range(self):
        with pytest.raises(OutOfRange):
            conjecture_status(1)

    def test_string_form(self):
        assert "settled by scenario fourth" in str(conjecture_status(4))
        assert "open" in str(conjecture_status(5))
