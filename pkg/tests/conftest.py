"""Shared fixtures and the acceptance-criterion summary banner.

Tests named ``test_criterion_<n>*`` in test_acceptance.py are tallied per
criterion number and reported as one PASS/FAIL line each at the end of the
run. Expensive benchmark trajectories are built once per session here and
shared across test modules.
"""

import re

import numpy as np
import pytest

from rdmprop.benchmarks import builtin_benzene, builtin_three_level
from rdmprop.propagate import Schedule, integrate

CRITERION_TITLES = {
    1: "three-level populations agree across rme/ume/ule within 1e-3",
    2: "hole complement defect large unblocked, below 1e-6 blocked",
    3: "filled-state residuals match per-channel rate asymmetries",
    4: "unblocked benzene overfills the ground orbital, ume slower",
    5: "blocked benzene stays in [0, 2] and reaches (2, 2, 2, 0, 0, 0)",
    6: "bath spectral function: detailed balance and quadrature checks",
    7: "adaptive-RK, matrix-exponential, and superoperator routes agree",
    8: "structural identities hold for 1000 random systems",
}

_criterion_results: dict[int, bool] = {}

_CRITERION_PATTERN = re.compile(
    r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    if report.when == "setup" and report.failed:
        pass
    elif report.when != "call":
        return
    m = _CRITERION_PATTERN.search(report.nodeid)
    if m is None:
        return
    k = int(m.group(1))
    ok = report.passed
    _criterion_results[k] = _criterion_results.get(k, True) and ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criterion_results):
        status = "PASS" if _criterion_results[k] else "FAIL"
        title = CRITERION_TITLES.get(k, "")
        terminalreporter.write_line(f"criterion {k}: {status}  {title}")


# Shared integration grids. One fixed window per system keeps the recorded
# times identical across generator kinds so populations can be compared
# pointwise.
THREE_LEVEL_T_END = 16000.0
BENZENE_T_END = 16000.0
BENZENE_BLOCKED_T_END = 1.2e6


@pytest.fixture(scope="session")
def three_level_50k_trajectories():
    """Unblocked three-level runs at 50 K, one per generator kind."""
    out = {}
    for kind in ("rme", "ume", "ule"):
        scenario = builtin_three_level(kind=kind, temperature=50.0,
                                       t_end=THREE_LEVEL_T_END, samples=60)
        out[kind] = integrate(scenario)
    return out


@pytest.fixture(scope="session")
def benzene_unblocked_trajectories():
    """Unblocked benzene runs at 50 K on a shared 200 au grid."""
    out = {}
    for kind, threshold in (("rme", 0.0), ("ume", 0.091), ("ule", 0.0)):
        scenario = builtin_benzene(kind=kind, clustering_threshold=threshold,
                                   t_end=BENZENE_T_END, samples=81)
        out[kind] = integrate(scenario)
    return out


@pytest.fixture(scope="session")
def benzene_blocked_trajectories():
    """Pauli-blocked benzene runs carried to the slow-channel steady state."""
    out = {}
    for kind, threshold in (("rme", 0.0), ("ume", 0.091), ("ule", 0.0)):
        scenario = builtin_benzene(kind=kind, pauli_blocked=True,
                                   clustering_threshold=threshold,
                                   t_end=BENZENE_BLOCKED_T_END, samples=50)
        scenario.schedule = Schedule(t_end=BENZENE_BLOCKED_T_END, samples=50,
                                     rtol=1e-10, atol=1e-12)
        out[kind] = integrate(scenario)
    return out


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260816)
