import numpy as np
import pytest

from marketoqs.operators import MarketState, PriceGrid

SQ2 = np.sqrt(0.5)


def toy_grid():
    return PriceGrid(np.array([-1.0, 0.0, 1.0]))


def rho_classical():
    return np.diag([0.25, 0.5, 0.25]).astype(complex)


def rho_quantum():
    v1 = np.array([SQ2, 0.0, SQ2])
    e2 = np.array([0.0, 1.0, 0.0])
    return (0.5 * np.outer(v1, v1) + 0.5 * np.outer(e2, e2)).astype(complex)


def strangle(o_minus=1.0, o1=2.0, o2=3.0):
    v1 = np.array([SQ2, 0.0, SQ2])
    v2 = np.array([SQ2, 0.0, -SQ2])
    e2 = np.array([0.0, 1.0, 0.0])
    return o_minus * np.outer(e2, e2) + o1 * np.outer(v1, v1) + o2 * np.outer(v2, v2)


@pytest.fixture
def toy_states():
    g = toy_grid()
    return MarketState(rho_classical(), g), MarketState(rho_quantum(), g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria register their verdicts here; printed after the run
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        tr.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
