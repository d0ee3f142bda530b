"""Compactly supported pump pulses ``f_nu(t) = k_nu exp(-2 / [t(1-t)]^nu)`` on (0, 1)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError

# exp(-745) is the smallest subnormal double; beyond it we return a hard zero
EXP_CUTOFF = 745.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _exponent(t: float, nu: float) -> float:
    # p (1 - p) with p the distance to the nearer edge never rounds to zero
    p = min(t, 1.0 - t)
    d = (p * (1.0 - p)) ** nu
    return 2.0 / d if d > 0.0 else math.inf


def _shape(t: float, nu: float) -> float:
    if t <= 0.0 or t >= 1.0:
        return 0.0
    e = _exponent(t, nu)
    if e > EXP_CUTOFF:
        return 0.0
    return math.exp(-e)


def _shape_array(t: np.ndarray, nu: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    p = np.where(inside, np.minimum(t, 1.0 - t), 0.5)
    with np.errstate(divide="ignore", over="ignore"):
        e = 2.0 / (p * (1.0 - p)) ** nu
    keep = inside & (e <= EXP_CUTOFF)
    return np.where(keep, np.exp(-np.where(keep, e, 0.0)), 0.0)


@lru_cache(maxsize=64)
def normalization_constant(nu: float, tol: float = 1e-10) -> float:
    """Return ``k_nu`` such that the pump integrates to one over (0, 1)."""
    if not nu > 0:
        raise DomainError(f"pump exponent nu must be positive, got {nu}")
    if not 0 < tol < 1e-3:
        raise DomainError(f"tolerance must lie in (0, 1e-3), got {tol}")
    # split at the peak and integrate each half; the shape is symmetric
    half, err = integrate.quad(_shape, 0.0, 0.5, args=(nu,), epsabs=0.0,
                               epsrel=tol, limit=500)
    if not half > 0 or err > tol * half:
        raise NumericalError(
            f"pump normalization did not converge for nu={nu}: "
            f"relative error estimate {err / half if half else math.inf:.3g}",
            achieved=err / half if half else math.inf)
    return 1.0 / (2.0 * half)


@dataclass(frozen=True)
class PumpSpec:
    """A normalized pump pulse of exponent ``nu``; time in units of the pump duration."""

    nu: float = 1.0
    k_nu: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"pump exponent nu must be positive, got {self.nu}")
        if self.k_nu == 0.0:
            object.__setattr__(self, "k_nu", normalization_constant(float(self.nu)))
        if not self.k_nu > 0:
            raise DomainError(f"normalization constant must be positive, got {self.k_nu}")

    @classmethod
    def from_nu(cls, nu: float, tol: float = 1e-10) -> "PumpSpec":
        return cls(nu=nu, k_nu=normalization_constant(float(nu), tol))

    def __call__(self, t):
        if np.ndim(t):
            return pump_values(self, t)
        return pump_value(self, t)


def pump_value(spec: PumpSpec, t: float) -> float:
    """Pump flux at time ``t``; exactly zero outside (0, 1)."""
    return spec.k_nu * _shape(float(t), spec.nu)


def pump_values(spec: PumpSpec, t) -> np.ndarray:
    """Vectorized :func:`pump_value`."""
    return spec.k_nu * _shape_array(t, spec.nu)


def pump_alpha_in(nu: float) -> float:
    """Stretched-exponential exponent of the pump spectrum, ``nu / (1 + nu)``."""
    if not nu > 0:
        raise DomainError(f"pump exponent nu must be positive, got {nu}")
    return nu / (1.0 + nu)


def pump_cumulative(spec: PumpSpec, t) -> np.ndarray:
    """Integral of the pump from 0 to each of the sorted times ``t``.

    Uses 16-point Gauss-Legendre on every interval between consecutive times,
    subdivided so no panel inside the support is wider than 1/128.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or np.any(np.diff(t) < 0):
        raise DomainError("times must be a sorted 1-d array")
    lo = np.clip(np.concatenate(([0.0], t[:-1])), 0.0, 1.0)
    hi = np.clip(t, 0.0, 1.0)
    out = np.zeros(len(t))
    for i, (a, b) in enumerate(zip(lo, hi)):
        if b <= a:
            continue
        m = max(1, int(math.ceil((b - a) * 128)))
        edges = np.linspace(a, b, m + 1)
        left = edges[:-1, None]
        width = np.diff(edges)[:, None]
        nodes = left + 0.5 * width * (_GL_X + 1.0)
        out[i] = np.sum(0.5 * width * _GL_W * pump_values(spec, nodes))
    return np.cumsum(out)
