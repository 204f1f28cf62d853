"""Acceptance suite: one test per check, one PASS/FAIL line each (run with -s
to see them; the CLI ``snowteam selftest`` prints the same lines)."""

import pytest

from snowteam.selfcheck import CHECKS


@pytest.mark.parametrize("name,fn", CHECKS, ids=[name for name, _ in CHECKS])
def test_acceptance(name, fn):
    ok, detail = fn()
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"
