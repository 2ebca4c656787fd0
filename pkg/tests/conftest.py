import numpy as np
import pytest

from tractorlab import metrics

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def flat():
    return metrics.load_metric("flat_euclidean")


@pytest.fixture(scope="session")
def sphere():
    return metrics.load_metric("round_sphere")


@pytest.fixture(scope="session")
def schw():
    return metrics.load_metric("schwarzschild")


@pytest.fixture(scope="session")
def bumpy():
    return metrics.load_metric("poly_perturbation", seed=11)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)
