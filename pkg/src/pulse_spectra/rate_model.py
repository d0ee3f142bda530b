"""Photon-number / excited-atom rate equations driven by a compact pump pulse.

    dx/dt = C (x + 1) a - eta C (N0 - a) x - r x
    da/dt = N0 f(t) - C (x + 1) a + eta C (N0 - a) x

Times are in units of the pump duration, rates in its inverse.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import ode
from .errors import DomainError, NumericalError, StiffnessError
from .io import atomic_write
from .pump import PumpSpec, pump_cumulative, pump_value

DEFAULT_T_END = 8.0
DEFAULT_REL_TOL = 1e-10
DEFAULT_ABS_TOL = 1e-8
# at least this many accepted steps inside the pump support
MIN_PUMP_STEPS = 64
# C N0 (1 + eta) above which the explicit stepper is skipped in "auto" mode
STIFF_LIMIT = 5e4


@dataclass(frozen=True)
class RateParams:
    n0: float = 1e7
    c: float = 1e-4
    r: float = 2.0
    eta: float = 1.0
    pump: PumpSpec = field(default_factory=PumpSpec)

    def __post_init__(self):
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise DomainError(f"n0 must be positive, got {self.n0}")
        # c == 0 switches emission off; only meaningful as a test limit
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise DomainError(f"c must be non-negative, got {self.c}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError(f"r must be positive, got {self.r}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")

    @property
    def stiffness(self) -> float:
        """Rough upper bound on the fast relaxation rate of the atom number."""
        return self.c * self.n0 * (1.0 + self.eta)

    def as_dict(self) -> dict:
        return {"n0": self.n0, "c": self.c, "r": self.r, "eta": self.eta,
                "nu": self.pump.nu}


@dataclass(frozen=True)
class LaserState:
    t: float
    x: float
    a: float


@dataclass(frozen=True)
class Trajectory:
    """Dense solution of the rate equations on ``[0, t_end]``."""

    params: RateParams
    t_end: float
    solution: ode.DenseSolution = field(repr=False)
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    diagnostics: dict = field(default_factory=dict)

    @property
    def nodes(self):
        """``(t, x, a)`` at every accepted step."""
        s = self.solution
        return s.t, s.y[:, 0], s.y[:, 1]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.solution.t

    def __call__(self, t):
        return envelope(self, t)

    def state(self, t: float) -> LaserState:
        if not 0.0 <= t <= self.t_end:
            raise DomainError(f"t={t} outside [0, {self.t_end}]")
        x, a = self.solution(t)
        return LaserState(float(t), max(float(x), 0.0), max(float(a), 0.0))


def derivatives(params: RateParams, state: LaserState):
    """Right-hand side ``(dx/dt, da/dt)`` evaluated term by term."""
    p = params
    emit = p.c * (state.x + 1.0) * state.a
    absorb = p.eta * p.c * (p.n0 - state.a) * state.x
    pump = p.n0 * pump_value(p.pump, state.t)
    return emit - absorb - p.r * state.x, pump - emit + absorb


def _rhs(params: RateParams):
    n0, c, r, eta, spec = params.n0, params.c, params.r, params.eta, params.pump

    # emission minus re-absorption regrouped as C [a + x ((1 + eta) a - eta N0)]:
    # near threshold the two terms cancel to many digits, the bracket does not
    def fun(t, y):
        x, a = y[0], y[1]
        net = c * (a + x * ((1.0 + eta) * a - eta * n0))
        return np.array([net - r * x, n0 * pump_value(spec, t) - net])

    def jac(t, y):
        x, a = y[0], y[1]
        dxx = c * a - eta * c * (n0 - a) - r
        dxa = c * (x + 1.0) + eta * c * x
        return np.array([[dxx, dxa], [-dxx - r, -dxa]])

    return fun, jac


def balance_residual(traj: Trajectory) -> np.ndarray:
    """``(x + a + r int x - N0 int f) / N0`` at every node.

    Both integrals are computed independently of the stepper: the photon
    integral from the dense-output polynomials, the pump integral by
    Gauss-Legendre quadrature.
    """
    t, x, a = traj.nodes
    p = traj.params
    int_x = np.concatenate(([0.0], np.cumsum(traj.solution.step_integrals(0))))
    int_f = pump_cumulative(p.pump, t)
    return (x + a + p.r * int_x - p.n0 * int_f) / p.n0


def simulate(params: RateParams, t_end: float = DEFAULT_T_END,
             rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = DEFAULT_ABS_TOL,
             method: str = "auto", max_step: float = 0.25) -> Trajectory:
    """Integrate from ``x = a = 0`` at ``t = 0`` to ``t_end``.

    ``abs_tol`` is in photons for ``x`` and relative to ``N0`` for ``a``; the
    photon number starts from a seed of order one, so scaling its tolerance
    by ``N0`` would leave the switch-on timing unresolved. ``method`` is ``"dopri5"``, ``"radau"``
    or ``"auto"``; auto uses the explicit stepper unless the atom relaxation
    rate makes the problem stiff, and falls back to Radau if the explicit
    stepper stalls.
    """
    if not t_end >= 1.0:
        raise DomainError(f"t_end must cover the pump support (>= 1), got {t_end}")
    if not 1e-13 <= rel_tol <= 1e-6:
        raise DomainError(f"rel_tol must lie in [1e-13, 1e-6], got {rel_tol}")
    if not abs_tol > 0:
        raise DomainError(f"abs_tol must be positive, got {abs_tol}")
    if method not in ("auto", "dopri5", "radau"):
        raise DomainError(f"unknown integration method {method!r}")

    fun, jac = _rhs(params)
    atol = np.array([abs_tol, abs_tol * params.n0])
    dense = (0.0, 1.0, 1.0 / MIN_PUMP_STEPS)
    chosen = method
    if method == "auto":
        chosen = "radau" if params.stiffness > STIFF_LIMIT else "dopri5"
    sol = None
    if chosen == "dopri5":
        try:
            sol = ode.dopri5(fun, 0.0, [0.0, 0.0], t_end, rel_tol, atol,
                             max_step=max_step, dense_max_step=dense)
        except StiffnessError:
            if method != "auto":
                raise
            chosen = "radau"
    if sol is None:
        sol = ode.radau(fun, jac, 0.0, [0.0, 0.0], t_end, rel_tol, atol,
                        max_step=max_step, dense_max_step=dense)
    if not np.all(np.isfinite(sol.y)):
        raise NumericalError("non-finite state in trajectory")

    traj = Trajectory(params, float(t_end), sol, rel_tol, abs_tol)
    res = balance_residual(traj)
    inside = np.count_nonzero((sol.t > 0.0) & (sol.t < 1.0))
    traj.diagnostics.update({
        "method": chosen,
        "steps": len(sol.t) - 1,
        "steps_in_pump": int(inside),
        "rejected": sol.n_rejected,
        "max_balance_residual": float(np.max(np.abs(res))),
        "x_end": float(sol.y[-1, 0]),
        "truncation_residual": float(params.r * max(sol.y[-1, 0], 0.0)),
        "min_x": float(sol.y[:, 0].min()),
        "min_a": float(sol.y[:, 1].min()),
    })
    return traj


def envelope(traj: Trajectory, t):
    """Photon number ``x(t)`` from the dense output, clamped at zero."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0) or np.any(tt > traj.t_end) or np.any(np.isnan(tt)):
        raise DomainError(f"time outside [0, {traj.t_end}]")
    x = traj.solution(tt)[..., 0]
    x = np.maximum(x, 0.0)
    return float(x) if np.ndim(x) == 0 else x


def peak(traj: Trajectory):
    """``(t_max, x_max)`` of the dense-output photon number."""
    t, x, _ = traj.nodes
    i = int(np.argmax(x))
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, len(t) - 1)]
    if hi <= lo:
        return float(t[i]), float(x[i])
    res = minimize_scalar(lambda s: -float(traj.solution(s)[0]), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    if -res.fun >= x[i]:
        return float(res.x), float(-res.fun)
    return float(t[i]), float(x[i])


def switch_on_time(traj: Trajectory, fraction: float = 0.01, xtol: float = 1e-9) -> float:
    """Earliest time at which ``x`` reaches ``fraction`` of its maximum."""
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")
    t_max, x_max = peak(traj)
    if not x_max > 0:
        raise DomainError("trajectory has no photons")
    if fraction == 1.0:
        return t_max
    level = fraction * x_max
    t, x, _ = traj.nodes
    i = int(np.argmax(x >= level))
    lo, hi = float(t[max(i - 1, 0)]), float(t[i])
    # bisection on the interpolant inside the bracketing step
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if traj.solution(mid)[0] >= level:
            hi = mid
        else:
            lo = mid
    return hi


def sample(traj: Trajectory, n: int = 2001):
    """Uniform samples ``(t, x, a)`` over ``[0, t_end]``."""
    if n < 2:
        raise DomainError(f"need at least 2 samples, got {n}")
    t = np.linspace(0.0, traj.t_end, n)
    y = traj.solution(t)
    return t, np.maximum(y[:, 0], 0.0), np.maximum(y[:, 1], 0.0)


def write_csv(traj: Trajectory, path, n: int | None = None):
    """Trajectory as ``t,x,a`` CSV with 17 significant digits.

    Writes the accepted solver nodes, or ``n`` uniform samples if given.
    """
    if n is None:
        t, x, a = traj.nodes
    else:
        t, x, a = sample(traj, n)

    def body(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "a"])
        for row in zip(t, x, a):
            w.writerow([f"{v:.17g}" for v in row])

    return atomic_write(path, body)
