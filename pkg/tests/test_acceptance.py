"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the measured
numbers next to each line.
"""

import json

import pytest

from cyclotoda import verify


@pytest.mark.parametrize("number", sorted(verify.CHECKS))
def test_criterion(number, capsys):
    check = verify.CHECKS[number]
    result = check(seed=0) if number in verify.SEEDED else check()
    with capsys.disabled():
        print()
        print(result.line())
        print("    " + json.dumps(result.detail, default=str, sort_keys=True)[:2000])
    assert result.passed, f"criterion {number} failed: {result.detail}"
