import numpy as np
import pytest

from hylomorph import make_log_potential, make_quadratic_potential
from hylomorph.profile_solver import FlowConfig, solve_profile


@pytest.fixture(scope="session")
def logpot():
    return make_log_potential()


@pytest.fixture(scope="session")
def linpot():
    return make_quadratic_potential(1.0)


@pytest.fixture(scope="session")
def small_soliton(logpot):
    """Coarse h=100 soliton, quick enough for evolution tests."""
    tr = solve_profile(logpot, 0, 100.0, FlowConfig(r_tilde=40.0, dr=0.2, e_omega=1e-9))
    assert tr.converged
    return tr.final


@pytest.fixture(scope="session")
def small_vortex(logpot):
    """Coarse ell=2, h=100 vortex."""
    tr = solve_profile(logpot, 2, 100.0, FlowConfig(r_tilde=60.0, dr=0.2, e_omega=1e-9))
    assert tr.converged
    return tr.final


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from verdicts import LINES

    if LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
