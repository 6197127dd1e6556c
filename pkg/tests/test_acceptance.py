"""Acceptance criteria A1-A10 plus the truncation-leakage check.

Each test prints one PASS/FAIL line.  Criteria that the model cannot meet
as stated are left red on purpose; see the decisions ledger for the analysis.
"""

import pytest

from kerrcat.validation import (
    check_a1,
    check_a2,
    check_a3,
    check_a4,
    check_a5,
    check_a6,
    check_a7,
    check_a8,
    check_a9,
    check_a10,
    check_truncation,
)


def report(capsys, results):
    results = results if isinstance(results, list) else [results]
    with capsys.disabled():
        for r in results:
            print("\n  " + r.line())
    return results[0]


@pytest.mark.parametrize("name, check", [
    ("A1", check_a1),
    ("A2", check_a2),
    ("A3", check_a3),
    ("A4", check_a4),
    ("A5", check_a5),
    ("A6", check_a6),
    ("A7", check_a7),
    ("A8", check_a8),
    ("A9", check_a9),
    ("A10", check_a10),
])
def test_criterion(name, check, capsys):
    result = report(capsys, check())
    assert result.name == name
    assert result.passed, result.detail


def test_truncation_leakage(capsys):
    assert report(capsys, check_truncation(2.0)).passed


def test_truncation_leakage_flags_small_space(capsys):
    result = report(capsys, check_truncation(2.0, 8))
    assert not result.passed
