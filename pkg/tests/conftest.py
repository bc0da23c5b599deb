import numpy as np
import pytest
from hypothesis import settings

from omheat import PhysicalParams, SystemDims

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")

# preset temperatures in kelvin: optical hotter, equal, mechanical hotter
TEMPS = {"fig2": (0.106, 0.101), "fig3": (0.106, 0.106), "fig4": (0.101, 0.106)}


def scenario_params(name, g=0.0, **kw):
    T_c, T_m = TEMPS[name]
    return PhysicalParams(g=g, T_c=T_c, T_m=T_m, **kw)


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


def random_hermitian(d, rng):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (X + X.conj().T)


def embedded_density(dims, support, rng):
    """Random state living on photon < support[0], phonon < support[1]."""
    rho = np.zeros((dims.joint, dims.joint), dtype=complex)
    idx = [dims.index(i, j) for i in range(support[0]) for j in range(support[1])]
    rho[np.ix_(idx, idx)] = random_density(len(idx), rng)
    return rho


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_dims():
    return SystemDims(4, 12)


# one line per acceptance criterion, printed at the end of the session
CRITERIA_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES):
            terminalreporter.write_line(line)
