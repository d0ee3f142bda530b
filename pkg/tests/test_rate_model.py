import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pulse_spectra import rate_model
from pulse_spectra.errors import DomainError
from pulse_spectra.pump import PumpSpec, pump_cumulative
from pulse_spectra.rate_model import LaserState, RateParams

from conftest import trajectory


@given(x=st.floats(0, 1e12), a=st.floats(0, 1e12), t=st.floats(0, 1),
       n0=st.sampled_from([1e7, 1e9, 1e12]), eta=st.floats(0, 1), c=st.floats(1e-6, 0.1))
def test_regrouped_rhs_matches_term_by_term(x, a, t, n0, eta, c):
    a = min(a, n0)
    p = RateParams(n0=n0, c=c, eta=eta)
    fun, _ = rate_model._rhs(p)
    dx, da = rate_model.derivatives(p, LaserState(t, x, a))
    got = fun(t, np.array([x, a]))
    scale = c * (x + 1) * a + eta * c * (n0 - a) * x + 2.0 * x + n0 * 1e4
    assert abs(got[0] - dx) <= 1e-12 * scale
    assert abs(got[1] - da) <= 1e-12 * scale


def test_jacobian_matches_finite_difference():
    p = RateParams(n0=1e9)
    fun, jac = rate_model._rhs(p)
    y = np.array([3e6, 4e8])
    J = jac(0.5, y)
    for k, h in enumerate([1.0, 1e2]):
        e = np.zeros(2)
        e[k] = h
        fd = (fun(0.5, y + e) - fun(0.5, y - e)) / (2 * h)
        assert np.allclose(J[:, k], fd, rtol=1e-6)


@pytest.mark.parametrize("eta", [0.0, 1.0])
def test_balance_identity(eta):
    tr = trajectory(eta=eta)
    assert np.max(np.abs(rate_model.balance_residual(tr))) < 1e-8


def test_zero_coupling_limit():
    # no emission: x stays zero, atoms accumulate the pump
    tr = rate_model.simulate(RateParams(c=0.0), t_end=2.0)
    t, x, a = tr.nodes
    assert np.all(x == 0.0)
    assert np.allclose(a, 1e7 * pump_cumulative(PumpSpec(), t), rtol=1e-8, atol=1e-3)


def test_switch_on_defaults():
    assert rate_model.switch_on_time(trajectory(eta=1.0)) == pytest.approx(0.55, abs=0.05)
    assert rate_model.switch_on_time(trajectory(eta=0.0)) == pytest.approx(0.40, abs=0.05)


def test_peak_after_switch_on():
    tr = trajectory()
    t_max, x_max = rate_model.peak(tr)
    assert 0.55 < t_max < 1.0
    assert 0 < x_max < 1e7
    assert rate_model.switch_on_time(tr, 1.0) == t_max


def test_integrators_agree():
    p = RateParams(n0=1e8)
    a = rate_model.simulate(p, method="dopri5")
    b = rate_model.simulate(p, method="radau")
    t = np.linspace(0, 8, 513)
    xa, xb = a(t), b(t)
    assert np.max(np.abs(xa - xb)) < 1e-6 * xa.max()


def test_envelope_domain():
    tr = trajectory()
    with pytest.raises(DomainError):
        tr(-0.1)
    with pytest.raises(DomainError):
        tr(np.array([0.5, 9.0]))
    assert tr(0.0) == 0.0


def test_pump_steps():
    tr = trajectory()
    assert tr.diagnostics["steps_in_pump"] >= rate_model.MIN_PUMP_STEPS


@pytest.mark.parametrize("kw", [dict(n0=0), dict(n0=-1), dict(c=-1e-4), dict(r=0), dict(eta=1.5)])
def test_param_validation(kw):
    with pytest.raises(DomainError):
        RateParams(**kw)


@pytest.mark.parametrize("kw", [dict(t_end=0.5), dict(rel_tol=1e-3), dict(method="euler")])
def test_simulate_validation(kw):
    with pytest.raises(DomainError):
        rate_model.simulate(RateParams(), **kw)


def test_csv_export(tmp_path):
    tr = trajectory()
    path = rate_model.write_csv(tr, tmp_path / "traj.csv", n=11)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,a" and len(lines) == 12
    t, x, a = map(float, lines[6].split(","))
    assert t == 4.0 and x == pytest.approx(tr(4.0), rel=1e-15)
