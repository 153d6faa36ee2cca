import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from leastcore.games import TabularGame

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance lines collected during the run and echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_tabular(n, rng, scale=1.0, positive_grand=False):
    values = np.concatenate([[0.0], scale * rng.normal(size=(1 << n) - 1)])
    if positive_grand:
        values[-1] = abs(values[-1]) + scale
    return TabularGame(values)


@st.composite
def tabular_games(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tabular(n, np.random.default_rng(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
