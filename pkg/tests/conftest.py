import numpy as np
import pytest

from geoquad.model import CableParams, ChainSystem, QuadParams

# criterion number -> (passed, detail); filled in by test_acceptance.py
ACCEPTANCE = {}


def report(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def hover_quad():
    return QuadParams(0.5, np.diag([0.557, 0.557, 1.05]) * 1e-2)


@pytest.fixture
def chain5():
    return ChainSystem(hover_quad(), CableParams.uniform(5, 0.1, 0.1))


def random_bearings(rng, n):
    q = rng.normal(size=(n, 3))
    q /= np.linalg.norm(q, axis=1)[:, None]
    w = np.cross(q, rng.normal(size=(n, 3)))
    return q, w
