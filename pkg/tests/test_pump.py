import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from pulse_spectra.errors import DomainError
from pulse_spectra.pump import (PumpSpec, normalization_constant, pump_alpha_in,
                                pump_cumulative, pump_value, pump_values)


def mp_norm(nu):
    # independent oracle: 30-digit tanh-sinh quadrature of the raw shape
    mpmath.mp.dps = 30
    f = lambda t: mpmath.exp(-2 / (t * (1 - t)) ** nu)
    return float(1 / mpmath.quad(f, [0, 0.25, 0.5, 0.75, 1]))


def test_k1_value():
    assert normalization_constant(1.0) == pytest.approx(1.031e4, rel=5e-3)


@pytest.mark.parametrize("nu", [1.0, 2.0, 0.5])
def test_normalization_matches_mpmath(nu):
    assert normalization_constant(nu) == pytest.approx(mp_norm(nu), rel=1e-9)


def test_k2_order_of_magnitude():
    assert normalization_constant(2.0) == pytest.approx(7.25e14, rel=1e-2)


def test_pump_integrates_to_one():
    spec = PumpSpec(nu=1.0)
    val, _ = integrate.quad(lambda t: pump_value(spec, t), 0, 1, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("t", [-1.0, 0.0, 1.0, 2.5, 1e-3])
def test_zero_outside_and_underflow(t):
    # at t = 1e-3 the exponent exceeds the cutoff and the value is an exact zero
    assert pump_value(PumpSpec(), t) == 0.0


def test_peak_value_and_symmetry():
    spec = PumpSpec()
    assert pump_value(spec, 0.5) == pytest.approx(spec.k_nu * math.exp(-8.0), rel=1e-14)


# dyadic times so that 1 - t is exact
@given(st.integers(0, 2**40).map(lambda k: k / 2**40), st.sampled_from([0.5, 1.0, 2.0]))
def test_symmetric_nonnegative(t, nu):
    spec = PumpSpec(nu=nu)
    a, b = pump_value(spec, t), pump_value(spec, 1.0 - t)
    assert a >= 0.0
    assert a == pytest.approx(b, rel=1e-12, abs=0.0)


@given(st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=20))
def test_vectorized_matches_scalar(ts):
    spec = PumpSpec()
    vec = pump_values(spec, np.array(ts))
    assert np.allclose(vec, [pump_value(spec, t) for t in ts], rtol=1e-13, atol=0.0)


def test_cumulative_matches_quad():
    spec = PumpSpec()
    t = np.array([0.0, 0.3, 0.5, 0.77, 1.0, 3.0])
    ref = [integrate.quad(lambda s: pump_value(spec, s), 0, min(x, 1.0), epsrel=1e-13,
                          limit=200)[0] if x > 0 else 0.0 for x in t]
    assert np.allclose(pump_cumulative(spec, t), ref, rtol=1e-11, atol=1e-15)


def test_alpha_in():
    assert pump_alpha_in(1.0) == 0.5
    assert pump_alpha_in(2.0) == pytest.approx(2 / 3)


@pytest.mark.parametrize("nu", [0.0, -1.0])
def test_bad_nu(nu):
    with pytest.raises(DomainError):
        PumpSpec(nu=nu)
    with pytest.raises(DomainError):
        pump_alpha_in(nu)


def test_bad_tolerance():
    with pytest.raises(DomainError):
        normalization_constant(1.0, tol=0.1)
