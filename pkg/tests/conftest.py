import pytest

from hypothesis import settings

settings.register_profile("trex", deadline=None, max_examples=60)
settings.load_profile("trex")


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=acceptance_log.sort_key):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20261019)
