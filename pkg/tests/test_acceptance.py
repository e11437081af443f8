"""Acceptance criteria at the full 512 x 512 size.

Each test prints one PASS/FAIL line with the measured values and the pinned
tolerance; run with ``pytest -s tests/test_acceptance.py`` to see them.
"""

import pytest

from spinorbit.acceptance import CRITERIA, run_criteria

SIZE = 512
CRITERION_SECONDS = 10.0
SUITE_SECONDS = 300.0

_results = {}


def _run(ident):
    if ident not in _results:
        _results[ident] = run_criteria([ident], size=SIZE)[0]
    return _results[ident]


@pytest.mark.slow
@pytest.mark.parametrize("ident", [c.ident for c in CRITERIA])
def test_criterion(ident):
    result = _run(ident)
    print("\n" + result.line())
    assert result.passed, result.line()


@pytest.mark.slow
def test_runtime_budget():
    results = [_run(c.ident) for c in CRITERIA]
    slow = [f"{r.ident} {r.seconds:.1f}s" for r in results if r.seconds > CRITERION_SECONDS]
    total = sum(r.seconds for r in results)
    print(f"\nsuite runtime {total:.1f}s (budget {SUITE_SECONDS:g}s, {CRITERION_SECONDS:g}s per criterion)")
    assert not slow, f"criteria over {CRITERION_SECONDS:g}s: {slow}"
    assert total <= SUITE_SECONDS
