import numpy as np
import pytest

from pdcsource import PDCSource
from pdcsource.jsa import FrequencyGrid, JointAmplitude


@pytest.fixture(scope="session")
def pos_source():
    return PDCSource(chirp_sign=1).fit()


@pytest.fixture(scope="session")
def neg_source():
    return PDCSource(chirp_sign=-1).fit()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_jsa(n=64, sigma_e=1.0, sigma_o=1.0, rho=0.0, span=8.0, phase=None):
    """Correlated Gaussian amplitude on a dimensionless uniform grid.

    |f|^2 is a bivariate normal with correlation ``rho``; for such a pure
    state the heralded purity is sqrt(1 - rho^2).
    """
    x = np.linspace(-span / 2, span / 2, n)
    ax_e = 1e15 + x * 1e12 * sigma_e
    ax_o = 1e15 + x * 1e12 * sigma_o
    X, Y = np.meshgrid(x, x, indexing="ij")
    q = (X**2 - 2 * rho * X * Y + Y**2) / (1 - rho**2)
    values = np.exp(-q / 4).astype(complex)
    if phase is not None:
        values = values * np.exp(1j * phase(X, Y))
    F = JointAmplitude(FrequencyGrid(ax_e, ax_o), values)
    return F.normalize()


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
