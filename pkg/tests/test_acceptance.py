"""Acceptance criteria at their stated tolerances, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary and by
running this file directly) and fails with the list of missed checks.
"""

import pytest

from circumnav import acceptance

from conftest import ACCEPTANCE_LINES


def report(result):
    line = result.line()
    print(line)
    for c in result.checks:
        print("    " + c.line())
    ACCEPTANCE_LINES.append(line)
    failed = [c.line() for c in result.checks if not c.passed]
    if failed:
        pytest.fail("\n".join(failed), pytrace=False)


def test_criterion_1_reference_scenario():
    report(acceptance.criterion_reference())


def test_criterion_2_stationary_asymptotics():
    report(acceptance.criterion_stationary())


def test_criterion_3_exponential_decay():
    report(acceptance.criterion_decay())


def test_criterion_4_beta_consensus():
    report(acceptance.criterion_consensus())


def test_criterion_5_filter_correctness():
    report(acceptance.criterion_filters())


def test_criterion_6_invariant_suite():
    report(acceptance.criterion_invariants())


def test_criterion_7_determinism_and_order():
    report(acceptance.criterion_determinism())


if __name__ == "__main__":
    results = acceptance.run_all()
    print()
    for r in results:
        print(r.line())
    raise SystemExit(0 if all(r.passed for r in results) else 1)
