import numpy as np
import pytest

from convbound import ExperimentConfig, FrequencyDist, normalize, simulate
from convbound.synth import FIG2A, FIG2B


@pytest.fixture(scope="session")
def fig2a():
    return normalize(simulate(FIG2A, label="fig2a"))


@pytest.fixture(scope="session")
def fig2b():
    return normalize(simulate(FIG2B, label="fig2b"))


def random_dist(rng, n_max=200, sparse=False):
    size = int(rng.integers(2, n_max + 2))
    w = rng.random(size)
    if sparse:
        w[rng.random(size) < 0.5] = 0.0
    w[-1] = max(w[-1], 1e-3)
    return FrequencyDist.from_weights(w)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
