import numpy as np
import pytest

from chaosexp.montecarlo import simulate_statistic
from chaosexp.wave import WaveModel

ACCEPTANCE_LINES = []

MC_M = 10 ** 6
MC_SEED = 12345


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mc_samples():
    """Lazily simulated replicates of F for t=1, shared across modules."""
    cache = {}

    def get(N, times=(1.0,), M=MC_M, seed=MC_SEED):
        key = (tuple(times), N, M, seed)
        if key not in cache:
            cache[key] = simulate_statistic(WaveModel(tuple(times), N), M, seed)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
