from __future__ import annotations

from functools import lru_cache

import pytest

from pulse_spectra import rate_model
from pulse_spectra.pump import PumpSpec
from pulse_spectra.rate_model import RateParams
from pulse_spectra.spectrum import default_omega_grid, transform_grid

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def trajectory(n0=1e7, c=1e-4, r=2.0, eta=1.0, nu=1.0):
    return rate_model.simulate(RateParams(n0=n0, c=c, r=r, eta=eta, pump=PumpSpec(nu=nu)))


@lru_cache(maxsize=None)
def model_spectrum(omega_min, omega_max, points=256, **kw):
    return transform_grid(trajectory(**kw), default_omega_grid(omega_min, omega_max, n_points=points))


@pytest.fixture(scope="session")
def default_traj():
    return trajectory()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
