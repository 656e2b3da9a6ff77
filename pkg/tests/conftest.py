"""Shared fixtures: bundled codes, their graphs, and seeded RNGs."""
import numpy as np
import pytest

from arbp.codes import load_code
from arbp.graph import build

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spc43():
    return load_code("SPC_4_3")


@pytest.fixture(scope="session")
def hamming74():
    return load_code("HAMMING_7_4")


@pytest.fixture(scope="session")
def bch3116():
    return load_code("BCH_31_16")


@pytest.fixture(scope="session")
def bch6351():
    return load_code("BCH_63_51")


@pytest.fixture(scope="session")
def polar6432():
    return load_code("POLAR_64_32")


@pytest.fixture(scope="session")
def spc43_graph(spc43):
    return build(spc43.H)


@pytest.fixture(scope="session")
def hamming74_graph(hamming74):
    return build(hamming74.H)


@pytest.fixture(scope="session")
def bch3116_graph(bch3116):
    return build(bch3116.H)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
