import numpy as np
import pytest

from hubnet.model import HubParams, NullHubParams

ACCEPTANCE_LINES = []


def random_hub_params(rng, n, n_L, low=0.0, high=0.95):
    A = rng.uniform(low, high, size=(n_L, n))
    A[np.arange(n_L), np.arange(n_L)] = 1.0
    return HubParams(rng.dirichlet(np.ones(n_L)), A)


def random_null_params(rng, n, n_L, low=0.0, high=0.95):
    A = rng.uniform(low, high, size=(n_L + 1, n))
    A[np.arange(1, n_L + 1), np.arange(n_L)] = 1.0
    return NullHubParams(rng.dirichlet(np.ones(n_L + 1)), A)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
