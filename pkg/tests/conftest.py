import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LEVEL, RESULTS

    if not RESULTS:
        return
    terminalreporter.section(f"acceptance criteria ({LEVEL})")
    for key in sorted(RESULTS, key=int):
        terminalreporter.write_line(RESULTS[key].line(timing=True))
