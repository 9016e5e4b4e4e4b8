"""Acceptance criteria: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-check lines.
"""
import pytest

from sl2branch import suite

TOL = 1e-6
assert suite.TOL == TOL

CHECKS = dict(suite.suite_checks(q=3, D=3, heisenberg_certify=True))
CRITERIA = [
    (1, "cuspidal-table"),
    (2, "shalika"),
    (3, "bk-restriction"),
    (4, "chi-psi"),
    (5, "depth-zero"),
    (6, "positive-depth"),
    (7, "heisenberg"),
    (8, "intertwining"),
    (9, "infrastructure"),
]


@pytest.mark.parametrize("num, name", CRITERIA, ids=[f"criterion{n}-{name}" for n, name in CRITERIA])
def test_criterion(num, name):
    results = CHECKS[name]()
    for res in results:
        print(f"  {res.line()}")
    ok = bool(results) and all(r.passed for r in results)
    print(f"{'PASS' if ok else 'FAIL'} criterion {num} {name}")
    failed = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert ok, "\n".join(failed)
