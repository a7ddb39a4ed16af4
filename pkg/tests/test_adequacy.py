"""Tests for the bounded bijection verifier and its term enumerator."""

import pytest

from godelgen.adequacy import (
    EnumBudget,
    Verdict,
    enumerate_terms,
    verify_all,
    verify_onto,
)
from godelgen.codec import build_plan
from godelgen.sigmodel import parse_signature, validate
from godelgen.termrep import print_term, term_size

# Budgets keep chain-shaped classes (every extra node costs a decode
# step, so sweeping n codes walks n(n+1)/2 nodes) to a few hundred
# codes while tree-shaped classes get the full default sweep.
NAT_CHAIN = {("nat", "-"): (6, 600)}
BUDGETS = {
    "nat": EnumBudget.with_overrides(max_size=8, per_class=NAT_CHAIN),
    "natlist": EnumBudget.with_overrides(
        per_class={**NAT_CHAIN, ("natlist", "-"): (6, 400)}
    ),
    "rat": EnumBudget.with_overrides(
        per_class={**NAT_CHAIN, ("rat", "-"): (6, 400)}
    ),
    "ratflip": EnumBudget.with_overrides(
        per_class={**NAT_CHAIN, ("rat", "-"): (6, 400)}
    ),
    "lambda": EnumBudget(),
    "termfam": EnumBudget.with_overrides(per_class=NAT_CHAIN),
    "bool": EnumBudget(),
    "exists": EnumBudget.with_overrides(
        max_code=3000, per_class={("nat", "-"): (6, 600)}
    ),
    "mixed": EnumBudget.with_overrides(per_class={("nat", "-"): (6, 600)}),
}


def closed_lambda_counts(max_size):
    # t(s, v) = number of terms of exactly s nodes with v free variables:
    # a variable costs one node, lam adds a variable, app splits the rest.
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def t(s, v):
        if s < 1:
            return 0
        total = v if s == 1 else 0
        total += t(s - 1, v + 1)
        total += sum(t(a, v) * t(s - 1 - a, v) for a in range(1, s - 1))
        return total

    return [t(s, 0) for s in range(1, max_size + 1)]


class TestEnumerator:
    def test_lambda_counts_match_recurrence(self, vsigs):
        terms = enumerate_terms(vsigs["lambda"], "t", None, 6)
        by_size = [0] * 6
        for term in terms:
            by_size[term_size(term) - 1] += 1
        assert by_size == closed_lambda_counts(6) == [0, 1, 2, 4, 13, 42]
        assert len(terms) == 62

    def test_lambda_smallest_terms(self, vsigs):
        vsig = vsigs["lambda"]
        terms = enumerate_terms(vsig, "t", None, 2)
        assert [print_term(vsig, t) for t in terms] == ["lam [x0] x0"]

    def test_bool_terms(self, vsigs):
        vsig = vsigs["bool"]
        terms = enumerate_terms(vsig, "bool", None, 3)
        assert [print_term(vsig, t) for t in terms] == ["true", "false"]

    def test_empty_type_enumerates_nothing(self):
        vsig = validate(parse_signature("e : type.\nd : type.\nmk : d.\n"))
        assert enumerate_terms(vsig, "e", None, 8) == []

    def test_nat_terms_in_size_order(self, vsigs):
        vsig = vsigs["nat"]
        terms = enumerate_terms(vsig, "nat", None, 4)
        rendered = [print_term(vsig, t) for t in terms]
        assert rendered == ["z", "s z", "s (s z)", "s (s (s z))"]

    def test_indexed_enumeration_respects_index(self, vsigs):
        vsig = vsigs["termfam"]
        zero = enumerate_terms(vsig, "term", 0, 3)
        assert "unit" in {print_term(vsig, t, index=0) for t in zero}
        one = enumerate_terms(vsig, "term", 1, 4)
        rendered = {print_term(vsig, t, index=1) for t in one}
        assert "lam [x0] x0" in rendered
        assert "unit" not in rendered


class TestBudget:
    def test_defaults(self):
        budget = EnumBudget()
        assert budget.max_size == 6
        assert budget.max_code == 10_000
        assert budget.size_for("nat", "-") == 6
        assert budget.code_for("nat", "-") == 10_000

    def test_overrides_select_by_class(self):
        budget = EnumBudget.with_overrides(
            per_class={("nat", "-"): (5, 300), ("term", "z"): (4, 200)}
        )
        assert budget.size_for("nat", "-") == 5
        assert budget.code_for("term", "z") == 200
        assert budget.code_for("term", "s") == 10_000

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"max_size": 0},
            {"max_code": 1},
            {"per_class": ((("nat", "-"), (0, 100)),)},
            {"per_class": ((("nat", "-"), (3, 1)),)},
        ],
    )
    def test_rejects_degenerate_bounds(self, kwargs):
        with pytest.raises(ValueError):
            EnumBudget(**kwargs)


class TestVerifyAll:
    @pytest.mark.parametrize("name", sorted(BUDGETS))
    def test_examples_verify(self, plans, name):
        report = verify_all(plans[name], BUDGETS[name])
        assert report.passed, report.json_dict(name)
        for row in report.classes:
            assert row.terms_checked > 0 or row.codes_checked >= 0
            assert row.counterexample is None

    def test_report_shape_for_indexed_family(self, plans):
        report = verify_all(plans["termfam"], BUDGETS["termfam"])
        labels = [(row.type_name, row.index_class) for row in report.classes]
        assert labels == [("nat", "-"), ("term", "z"), ("term", "s")]
        by_label = {row.index_class: row for row in report.classes}
        # the s class is verified at two representative indices
        assert by_label["s"].codes_checked == 2 * 10_000
        assert by_label["z"].codes_checked == 10_000

    def test_report_deterministic(self, plans):
        budget = EnumBudget.with_overrides(max_size=4, max_code=50)
        r1 = verify_all(plans["lambda"], budget)
        r2 = verify_all(plans["lambda"], budget)
        assert r1 == r2  # elapsed time is excluded from comparison
        assert r1.json_dict("x.sig") == r2.json_dict("x.sig")

    def test_json_layout(self, plans):
        budget = EnumBudget.with_overrides(max_size=3, max_code=10)
        report = verify_all(plans["bool"], budget)
        data = report.json_dict("tests/data/bool.sig")
        assert data["signature"] == "tests/data/bool.sig"
        assert data["classes"] == [
            {
                "type": "bool",
                "index_class": "-",
                "total": True,
                "unique": True,
                "onto": True,
                "one_to_one": True,
                "terms_checked": 2,
                "codes_checked": 2,
            }
        ]

    def test_finite_class_clamps_code_sweep(self, plans):
        report = verify_all(plans["bool"], EnumBudget())
        (row,) = report.classes
        assert row.codes_checked == 2


class TestFailureDetection:
    def test_unrepaired_tag_order_fails_onto(self, vsigs):
        # frac first makes code 0 ask for a rat inside a rat forever
        plan = build_plan(vsigs["ratflip"])
        verdict = verify_onto(plan, "rat", None, EnumBudget.with_overrides(max_code=5))
        assert not verdict.passed
        assert verdict.checked == 0
        assert "code 0" in verdict.counterexample
        assert "FuelExhausted" in verdict.counterexample

    def test_failure_surfaces_in_report(self, vsigs):
        plan = build_plan(vsigs["ratflip"])
        budget = EnumBudget.with_overrides(
            max_size=4, max_code=5, per_class={("nat", "-"): (4, 5)}
        )
        report = verify_all(plan, budget)
        assert not report.passed
        failing = {row.type_name: row for row in report.classes if not row.passed}
        assert set(failing) == {"rat"}
        assert failing["rat"].counterexample is not None
        data = report.json_dict("x")
        rat_row = [r for r in data["classes"] if r["type"] == "rat"][0]
        assert "counterexample" in rat_row


class TestWorkers:
    def test_parallel_matches_sequential(self, plans):
        budget = EnumBudget.with_overrides(max_code=700)
        seq = verify_onto(plans["lambda"], "t", None, budget)
        par = verify_onto(plans["lambda"], "t", None, budget, workers=4)
        assert seq == par == Verdict(True, 700)

    def test_parallel_reports_first_failure(self, vsigs):
        plan = build_plan(vsigs["ratflip"])
        budget = EnumBudget.with_overrides(max_code=600)
        verdict = verify_onto(plan, "rat", None, budget, workers=4)
        assert not verdict.passed
        assert verdict.checked == 0
