import numpy as np
import pytest

from mmreg.datagen import sample_dataset1


@pytest.fixture(scope="session")
def dataset1():
    """Default-seed noise-free dataset I, 100 pairs of 128x128."""
    return sample_dataset1(seed=2012, n_pairs=100)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


class _Criterion:
    def __init__(self, name):
        self.name = name
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = self.detail if exc_type is None else f"{self.detail} {exc_type.__name__}: {exc}".strip()
        line = f"{status} {self.name}: {detail}".replace("\n", " ")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return False


@pytest.fixture
def criterion():
    """``with criterion("name") as c:`` records one PASS/FAIL line for the block."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
