import numpy as np
import pytest

from fwbreak.spectral import Field, GridSpec


def sampled(n, func):
    grid = GridSpec(n)
    return Field(grid, np.asarray(func(grid.x), dtype=float) * np.ones(n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blowup_artifact():
    from fwbreak.verify import blowup_run

    return blowup_run()


@pytest.fixture(scope="session")
def small_sine_artifact():
    from fwbreak.verify import small_sine_run

    return small_sine_run()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
