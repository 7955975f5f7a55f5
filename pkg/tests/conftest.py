import math

import pytest

from shellkernel.kernel import KernelContext
from shellkernel.weight import ModelWeight

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def w12():
    return ModelWeight(A=1.0, B=2.0)


@pytest.fixture(scope="session")
def pure():
    return ModelWeight()


@pytest.fixture(scope="session")
def ctx4(w12):
    """k = 1e4 with the (A=1, B=2) weight, shared across modules."""
    return KernelContext(10**4, w12)


@pytest.fixture(scope="session")
def ctx4_pure(pure):
    return KernelContext(10**4, pure)


@pytest.fixture(scope="session")
def ctx500(w12):
    return KernelContext(500, w12)


def sqrtk_logk(k):
    return math.sqrt(k) * math.log(k)
