#!/usr/bin/env python3
"""The scenario catalog: constructions with prescribed collapse powers.

Each scenario fixes a fact base and an operator ``T`` whose power domains
collapse to {0} exactly at a prescribed exponent, on both the operator and
its adjoint.  ``run_proposition`` re-derives every expected verdict;
``conjecture_status`` reports which exponents the catalog settles.
"""

from domcalc import conjecture_status, run_all, run_proposition

print("== the five named scenarios ==")
for report in run_all():
    print(report.to_text())

print("== the doubling construction, levels 1..5 ==")
for n in range(1, 6):
    report = run_proposition(f"nested:{n}")
    status = "PASS" if report.passed else "FAIL"
    rows = ", ".join(f"{r.judgment}: {r.derived.value}" for r in report.rows)
    print(f"  nested:{n} [{status}]  {rows}")

print()
print("== which collapse exponents are settled? ==")
for n in range(2, 18):
    print(f"  {conjecture_status(n)}")
print("  ...")
print(f"  {conjecture_status(1024)}")
