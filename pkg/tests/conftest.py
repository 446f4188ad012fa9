import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from beurling import FiniteMetricSpace, Kernel, toeplitz_from_symbol

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def tridiagonal(n, diag=4.0, off=1.0):
    """The (diag, off) tridiagonal Toeplitz section on {0, ..., n-1}."""
    return toeplitz_from_symbol({0: diag, 1: off, -1: off}, FiniteMetricSpace.segment(n))


def kernel(rows):
    arr = np.array(rows, dtype=complex)
    return Kernel(FiniteMetricSpace.segment(arr.shape[0]), arr)


@pytest.fixture
def tri64():
    return tridiagonal(64)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
