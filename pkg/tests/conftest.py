import time

import pytest

from pfold.branch import trace
from pfold.cli import annotate_branch
from pfold.nonlinearity import NonlinearitySpec
from pfold.radial_ode import ProblemSpec

ACCEPTANCE = {}

SWEEPS = {
    (2.0, 2.0): (0.05, 8.0),
    (1.5, 3.0): (0.05, 8.0),
    (1.5, 5.0): (0.05, 8.0),
    (1.5, 14.0): (0.1, 30.0),
}

_cache = {}


def exponential(p, n, R=1.0):
    return ProblemSpec(p, n, NonlinearitySpec.exponential(), R)


def traced(p, n):
    """Branch for a fixed scenario, traced once per session; returns (branch, seconds)."""
    key = (p, n)
    if key not in _cache:
        a_min, a_max = SWEEPS[key]
        t0 = time.perf_counter()
        branch = trace(exponential(p, n), a_min, a_max, steps=32, refine=True, workers=1)
        _cache[key] = (branch, time.perf_counter() - t0)
    return _cache[key]


def annotated(p, n):
    branch, seconds = traced(p, n)
    if not getattr(branch, "_annotated", False):
        annotate_branch(branch, 1e-10)
        branch._annotated = True
    return branch


@pytest.fixture(scope="session")
def liouville_branch():
    return annotated(2.0, 2.0)


@pytest.fixture(scope="session")
def branches_p15():
    return {n: annotated(1.5, n) for n in (3.0, 5.0, 14.0)}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
