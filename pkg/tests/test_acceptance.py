"""Acceptance gate: one pass/fail line per criterion."""

import pytest

from kdvlab import acceptance


@pytest.mark.parametrize(
    "name,func", acceptance.CRITERIA, ids=[name for name, _ in acceptance.CRITERIA]
)
def test_criterion(name, func):
    ok, detail = func(seed=0)
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    assert ok, line
