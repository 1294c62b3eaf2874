import math

import numpy as np
import pytest

STARLINK_GAMMA = math.radians(5.2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def rotate_towards(axis_from, axis_to, angle):
    """Point at ``angle`` from ``axis_from`` on the great circle towards ``axis_to``."""
    a = np.asarray(axis_from, float)
    b = np.asarray(axis_to, float)
    b = b - a * (a @ b)
    b /= np.linalg.norm(b)
    return math.cos(angle) * a + math.sin(angle) * b


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
