"""Shared fixtures and the acceptance summary.

Tests marked ``@pytest.mark.acceptance(n, "title")`` are collected into a
per-criterion verdict printed after the run: a criterion passes when all of
its tests pass.
"""

from __future__ import annotations

import math

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n, title = mark.args
        entry = _RESULTS.setdefault(n, {"title": title, "passed": 0, "failed": 0, "skipped": 0})
        if rep.passed:
            entry["passed"] += 1
        elif rep.skipped:
            entry["skipped"] += 1
        else:
            entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        e = _RESULTS[n]
        if e["failed"]:
            verdict = "FAIL"
        elif e["passed"] and not e["skipped"]:
            verdict = "PASS"
        else:
            verdict = "INCOMPLETE"
        tr.write_line(f"criterion {n:2d}: {verdict:10s} {e['title']} "
                      f"({e['passed']} passed, {e['failed']} failed, {e['skipped']} skipped)")


@pytest.fixture(scope="session")
def warm():
    """Compile the kernels once so timing checks measure the computation."""
    from singdet import BoundaryPair, SingularProblem, lowest_eigs, discretize, zeta_det
    zeta_det(SingularProblem(0.3, "x"), BoundaryPair(0.5, 0.5))
    lowest_eigs(discretize(SingularProblem(0.5), BoundaryPair(), n=100), 1)
    return True


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def model_det(nu: float) -> float:
    return math.sqrt(2.0 * math.pi) / (2.0 ** nu * math.gamma(nu + 1.0))
