"""Tail checks on the spectrum of a compactly supported smooth pump.

A smooth pulse of compact support has a transform that falls faster than any
power of w yet slower than any exponential. Both sides are checked numerically
on the peak line of ``F`` (the pump is symmetric, so ``F`` has zeros between
the peaks), together with the decay exponent ``nu / (1 + nu)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import specfit
from .errors import InsufficientDataError
from .pump import PumpSpec, pump_alpha_in
from .spectrum import QuadratureSettings, Spectrum, transform_grid

# peaks below this fraction of F(0) are lost in cancellation noise
RELIABLE_LEVEL = 1e-12
ALPHA_TOL = 0.05
POWERS = tuple(range(1, 9))
MIN_TAIL_PEAKS = 3


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    target: str
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    nu: float
    omega_max: float
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"nu": self.nu, "omega_max": self.omega_max, "passed": self.passed,
                "checks": [asdict(c) for c in self.checks]}


def pump_spectrum(nu: float, omega_max: float = 320.0, step: float = 0.05,
                  settings: QuadratureSettings | None = None) -> Spectrum:
    """``F`` of the normalized pump on a uniform grid fine enough to resolve its zeros."""
    grid = np.arange(1.0, omega_max + 0.5 * step, step)
    return transform_grid(PumpSpec(nu=nu), grid, settings, t_end=1.0)


def reliable_peaks(spec: Spectrum, level: float = RELIABLE_LEVEL):
    """Peak line up to the first peak below ``level`` times ``F(0) = 1``."""
    ps = specfit.find_peaks(spec, spec.omega[0], spec.omega[-1])
    w, f = ps.peak_omega, ps.peak_f
    low = np.flatnonzero(f < level)
    if len(low):
        w, f = w[:low[0]], f[:low[0]]
    return w, f


def eventually_decreasing(w, f, n: int):
    """First peak index after which ``w^n F`` decreases monotonically, or None."""
    g = n * np.log(w) + np.log(f)
    rising = np.flatnonzero(np.diff(g) >= 0)
    k = 0 if len(rising) == 0 else int(rising[-1]) + 1
    return k if len(g) - 1 - k >= MIN_TAIL_PEAKS else None


def run(nu: float = 1.0, omega_min: float = 20.0, omega_max: float = 320.0,
        step: float = 0.05, spec: Spectrum | None = None) -> Report:
    spec = spec if spec is not None else pump_spectrum(nu, omega_max, step)
    w, f = reliable_peaks(spec)
    if len(w) < MIN_TAIL_PEAKS + 1:
        raise InsufficientDataError(f"only {len(w)} reliable peaks in the pump spectrum")
    top = float(w[-1])
    checks = []

    for n in POWERS:
        k = eventually_decreasing(w, f, n)
        checks.append(Check(f"power_{n}", k is not None,
                            math.nan if k is None else float(w[k]),
                            "w^n F decreasing beyond some w below the last reliable peak",
                            {"n": n, "turnover_omega": None if k is None else float(w[k])}))

    lnf = np.log(f)
    r_top = lnf[-1] / top
    r_quarter = float(np.interp(top / 4, w, lnf)) / (top / 4)
    ratio = r_top / r_quarter
    checks.append(Check("log_ratio_halves", bool(ratio < 0.5), float(ratio),
                        "(ln F / w at w_max) / (ln F / w at w_max/4) < 0.5",
                        {"omega_max": top, "ratio_top": float(r_top),
                         "ratio_quarter": float(r_quarter)}))

    m = w >= omega_min
    alpha, _, rms = specfit.fit_points(w[m], f[m], "rate")
    expected = pump_alpha_in(nu)
    checks.append(Check("alpha_in", bool(abs(alpha - expected) <= ALPHA_TOL), float(alpha),
                        f"{expected:.4f} +- {ALPHA_TOL}",
                        {"window": [float(omega_min), top], "peaks": int(m.sum()),
                         "rms_residual": rms, "estimator": "rate"}))
    return Report(float(nu), top, checks)
