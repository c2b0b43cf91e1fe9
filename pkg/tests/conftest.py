import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def direct_dft(x, normalization="unnormalized"):
    """O(n^2) evaluation of X[k] = s * sum_m x[m] exp(-2 pi i k m / n)."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    m = np.arange(n)
    X = np.array([np.sum(x * np.exp(-2j * np.pi * k * m / n)) for k in range(n)])
    return X / np.sqrt(n) if normalization == "orthonormal" else X


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
