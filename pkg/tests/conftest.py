"""Shared fixtures: reference models, a random stable-model factory, and
the acceptance summary hook that prints one pass/fail line per criterion
at the end of the run."""

import numpy as np
import pytest

from mlsrbm import LevelSpec, build_model, stationary_law


def make_stable_spec(rng, k, zero_drift_at=()):
    """Random stable spec: increasing boundaries, positive sigmas, negative
    top drift.  zero_drift_at lists 0-based interior levels forced to b = 0."""
    widths = rng.uniform(0.3, 1.5, size=k - 1)
    boundaries = tuple(float(v) for v in np.cumsum(widths))
    sigmas = tuple(float(v) for v in rng.uniform(0.4, 2.5, size=k))
    drifts = [float(v) for v in rng.uniform(-2.0, 2.0, size=k)]
    drifts[-1] = -float(rng.uniform(0.3, 2.0))
    for j in zero_drift_at:
        drifts[j] = 0.0
    return LevelSpec(boundaries, sigmas, tuple(drifts))


@pytest.fixture(scope="session")
def m1():
    """Two-level reference: l1 = 1, sigma = (1, 1), b = (1, -1)."""
    return build_model(LevelSpec((1.0,), (1.0, 1.0), (1.0, -1.0)))


@pytest.fixture(scope="session")
def k3():
    """Three-level reference: l = (1, 2), sigma = (1, 2, 1), b = (1, 1, -1)."""
    return build_model(LevelSpec((1.0, 2.0), (1.0, 2.0, 1.0), (1.0, 1.0, -1.0)))


@pytest.fixture(scope="session")
def mflat():
    """Single level, pure reflected Brownian motion with negative drift."""
    return build_model(LevelSpec((), (1.0,), (-1.0,)))


@pytest.fixture(scope="session")
def m_zero_drift():
    """Two levels with a zero-drift first segment (uniform piece)."""
    return build_model(LevelSpec((1.0,), (1.0, 1.0), (0.0, -1.0)))


@pytest.fixture(scope="session")
def law_m1(m1):
    return stationary_law(m1)


_acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance():
    """Recorder for the acceptance tests; one line per criterion, printed
    in the terminal summary whether the criterion passed or failed."""

    def record(criterion: int, passed: bool, detail: str):
        tag = "PASS" if passed else "FAIL"
        _acceptance_lines.append((criterion, f"criterion {criterion}: {tag}  {detail}"))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
