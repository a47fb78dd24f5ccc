import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_signal(rng, shape, lo=0.2, hi=0.7):
    """Complex values with magnitudes uniform in ``[lo, hi]`` and uniform phases."""
    return rng.uniform(lo, hi, shape) * np.exp(2j * np.pi * rng.uniform(size=shape))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
