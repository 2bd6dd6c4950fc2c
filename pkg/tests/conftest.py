import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("eprb", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("eprb")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
