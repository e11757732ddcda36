import numpy as np
import pytest

from uplink_se.network import NetworkConfig

ACCEPTANCE_LINES = []


def small_config(**kw):
    base = dict(cells=3, users_per_cell=4, antennas=16, coherence_symbols=200, pilot_symbols=8, noise_power=1.0)
    base.update(kw)
    return NetworkConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
