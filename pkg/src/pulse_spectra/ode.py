"""Adaptive integrators returning piecewise-polynomial dense output.

Two steppers share one output type, :class:`DenseSolution`:

* :func:`dopri5` -- explicit Dormand-Prince 5(4) with the 4th-order continuous
  extension of Hairer, Norsett & Wanner.
* :func:`radau` -- scipy's Radau IIA (order 5) for the stiff regime, with its
  cubic collocation polynomial repacked into the same layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import Radau

from .errors import NumericalError, StiffnessError

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# 5th minus 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output weights
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
      -10690763975 / 1880347072, 701980252875 / 199316789632,
      -1453857185 / 822651844, 69997945 / 29380423)


@dataclass
class DenseSolution:
    """Piecewise polynomial ``y(t_i + theta h_i) = sum_k coef[i, k] theta^k``.

    ``coef[i, 0]`` is the node value ``y[i]``, so evaluation exactly at a node
    returns the stored value.
    """

    t: np.ndarray          # (n + 1,)
    y: np.ndarray          # (n + 1, m)
    coef: np.ndarray       # (n, degree + 1, m)
    n_rejected: int = 0
    method: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def degree(self) -> int:
        return self.coef.shape[1] - 1

    def __call__(self, tq):
        tq = np.asarray(tq, dtype=float)
        scalar = tq.ndim == 0
        tq = np.atleast_1d(tq)
        idx = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[idx + 1] - self.t[idx]
        theta = (tq - self.t[idx]) / h
        c = self.coef[idx]
        out = c[:, -1, :].copy()
        for k in range(self.degree - 1, -1, -1):
            out = out * theta[:, None] + c[:, k, :]
        at_end = tq == self.t[-1]
        if np.any(at_end):
            out[at_end] = self.y[-1]
        return out[0] if scalar else out

    def step_integrals(self, component: int = 0) -> np.ndarray:
        """Exact integral of the interpolant of ``component`` over each step."""
        h = np.diff(self.t)
        k = np.arange(self.degree + 1)
        return h * (self.coef[:, :, component] @ (1.0 / (k + 1)))


def _rms_norm(v):
    return math.sqrt(float(np.dot(v, v)) / len(v))


def dopri5(fun, t0, y0, t_end, rtol, atol, max_step=math.inf, dense_max_step=None,
           first_step=None, max_steps=200_000):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    ``dense_max_step`` is an optional ``(a, b, h)`` triple capping the step at
    ``h`` while inside ``[a, b]``.
    """
    y = np.array(y0, dtype=float)
    m = len(y)
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (m,))
    t = float(t0)
    f = np.asarray(fun(t, y), dtype=float)

    def cap(tt):
        hcap = max_step
        if dense_max_step is not None:
            a, b, hd = dense_max_step
            if a <= tt < b:
                hcap = min(hcap, hd)
            elif tt < a:
                hcap = min(hcap, a - tt)  # land on the start of the capped region
        return hcap

    if first_step is None:
        scale = atol + rtol * np.abs(y)
        d0, d1 = _rms_norm(y / scale), _rms_norm(f / scale)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, cap(t), t_end - t)
    else:
        h = first_step

    ts, ys, coefs = [t], [y.copy()], []
    k = np.empty((7, m))
    n_rej = 0
    safety, min_fac, max_fac = 0.9, 0.2, 10.0
    while t < t_end:
        if len(coefs) >= max_steps:
            raise StiffnessError(f"step budget of {max_steps} exhausted at t={t:.6g}", t)
        h = min(h, cap(t))
        last = t + h >= t_end or t_end - (t + h) < 1e-12 * max(1.0, abs(t_end))
        if last:
            h = t_end - t
        if h <= 1e-14 * max(1.0, abs(t)):
            raise StiffnessError(f"step size underflow at t={t:.6g}", t)
        k[0] = f
        for s in range(1, 7):
            ys_ = y + h * np.dot(_A[s], k[:s])
            k[s] = fun(t + _C[s] * h, ys_)
        y_new = ys_  # stage 7 is evaluated at the 5th-order solution (FSAL)
        err = h * np.dot(_E, k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = _rms_norm(err / scale)
        if not np.all(np.isfinite(y_new)):
            if h < 1e-12:
                raise NumericalError(f"non-finite state at t={t:.6g}")
            h *= 0.25
            n_rej += 1
            continue
        if err_norm <= 1.0:
            t_new = t_end if last else t + h
            # dense output, power basis in theta
            ydiff = y_new - y
            bspl = h * k[0] - ydiff
            r4 = ydiff - h * k[6] - bspl
            r5 = h * np.dot(_D, k)
            c = np.empty((5, m))
            c[0] = y
            c[1] = ydiff + bspl
            c[2] = r4 + r5 - bspl
            c[3] = -(r4 + 2.0 * r5)
            c[4] = r5
            coefs.append(c)
            t = t_new
            y = y_new
            f = k[6].copy()
            ts.append(t)
            ys.append(y.copy())
            fac = max_fac if err_norm == 0 else min(max_fac, safety * err_norm ** -0.2)
            h *= max(min_fac, fac)
        else:
            n_rej += 1
            h *= max(min_fac, safety * err_norm ** -0.2)
    return DenseSolution(np.array(ts), np.array(ys), np.array(coefs), n_rej, "dopri5")


def radau(fun, jac, t0, y0, t_end, rtol, atol, max_step=math.inf, dense_max_step=None):
    """Implicit Radau IIA stepping via scipy, repacked as a :class:`DenseSolution`."""
    ts, ys, coefs = [float(t0)], [np.array(y0, dtype=float)], []

    def run(a, b, y_start, hmax):
        solver = Radau(fun, a, y_start, b, rtol=rtol, atol=atol, jac=jac,
                       max_step=hmax)
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise StiffnessError(f"Radau failed at t={solver.t:.6g}: {msg}", solver.t)
            d = solver.dense_output()
            c = np.vstack([d.y_old[None, :], d.Q.T])
            if not np.all(np.isfinite(c)):
                raise NumericalError(f"non-finite state at t={solver.t:.6g}")
            coefs.append(c)
            ts.append(solver.t)
            ys.append(solver.y.copy())
        return solver.y

    # segment the interval so the dense-step cap only applies where asked
    y = ys[0]
    bounds = [float(t0)]
    if dense_max_step is not None:
        a, b, hd = dense_max_step
        for edge in (a, b):
            if t0 < edge < t_end:
                bounds.append(edge)
    bounds.append(float(t_end))
    for a, b in zip(bounds[:-1], bounds[1:]):
        hmax = max_step
        if dense_max_step is not None and dense_max_step[0] <= a < dense_max_step[1]:
            hmax = min(hmax, dense_max_step[2])
        y = run(a, b, y, hmax)
    return DenseSolution(np.array(ts), np.array(ys), np.array(coefs), 0, "radau")
