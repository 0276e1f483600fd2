import numpy as np
import pytest

from mocasm.data import Dataset

TOY = [0.0, 0.1, 0.2, 5.0, 5.1, 5.2]


@pytest.fixture
def toy():
    return Dataset(np.array(TOY))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one ``PASS``/``FAIL`` line; shown in the terminal summary."""

    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
