"""Stretched-exponential exponent estimates from a spectrum.

Two estimators are provided.

``direct``
    ``alpha = -slope`` of ``ln ln F`` against ``ln w``. Exact for
    ``F = exp(c w^-alpha)``; for ``F = exp(A - c w^alpha)`` it is a local
    log-derivative of ``ln F`` and only approaches ``alpha`` when ``A`` is
    negligible.
``rate``
    ``alpha = 1 + slope`` of ``ln(-d ln F / d w)`` against ``ln w``. Exact for
    ``F = exp(A - c w^alpha)`` at any prefactor ``A`` and invariant under
    ``F -> k F``.

Both are ordinary least squares over the window, either on every grid point
or on the peak line of an oscillating spectrum.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDataError
from .io import atomic_write
from .spectrum import Spectrum

METHODS = ("direct", "rate")
MIN_POINTS = 8
MIN_PEAK_POINTS = 16
MIN_PEAKS = 3
NONLINEAR_RMS = 0.05
# ln F at the top of the window below which the double log is distorted
MIN_LN_F = 2.0


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    intercept: float
    omega_min: float
    omega_max: float
    method: str
    rms_residual: float
    n_points: int
    estimator: str = "direct"
    flags: tuple = ()

    @property
    def accepted(self) -> bool:
        return 0.0 < self.alpha < 1.0

    @property
    def nonlinear(self) -> bool:
        return self.rms_residual > NONLINEAR_RMS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AlphaFit":
        d = dict(d)
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)


@dataclass(frozen=True)
class PeakSet:
    peaks: list = field(default_factory=list)
    troughs: list = field(default_factory=list)

    def __len__(self):
        return len(self.peaks)

    @property
    def peak_omega(self) -> np.ndarray:
        return np.array([p[0] for p in self.peaks])

    @property
    def peak_f(self) -> np.ndarray:
        return np.array([p[1] for p in self.peaks])


def _window(spectrum: Spectrum, omega_min, omega_max):
    if not omega_min < omega_max:
        raise DomainError(f"empty window [{omega_min}, {omega_max}]")
    m = (spectrum.omega >= omega_min) & (spectrum.omega <= omega_max)
    return spectrum.omega[m], spectrum.f_mag[m]


def _ols(z, y):
    A = np.column_stack([z, np.ones_like(z)])
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * z + icept)
    return float(slope), float(icept), float(math.sqrt(np.mean(resid ** 2)))


def fit_points(omega, f, estimator: str = "direct", allow_small: bool = False):
    """Least-squares ``(alpha, intercept, rms)`` over the points ``(omega, f)``.

    With ``allow_small`` the direct estimator accepts ``F < 1`` throughout and
    fits ``ln(-ln F)`` instead (exact for ``exp(-c w^alpha)``); the window must
    not straddle ``F = 1``.
    """
    omega = np.asarray(omega, dtype=float)
    f = np.asarray(f, dtype=float)
    if estimator not in METHODS:
        raise DomainError(f"unknown estimator {estimator!r}")
    if np.any(omega <= 0) or np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise DomainError("fit needs positive frequencies and positive finite F")
    z = np.log(omega)
    lnf = np.log(f)
    if estimator == "direct":
        if np.all(lnf > 0):
            slope, icept, rms = _ols(z, np.log(lnf))
            return -slope, icept, rms
        if allow_small and np.all(lnf < 0):
            # F = exp(-c w^alpha): ln(-ln F) rises with slope +alpha
            slope, icept, rms = _ols(z, np.log(-lnf))
            return slope, icept, rms
        raise DomainError("F <= 1 in window: ln ln F undefined; rescale the spectrum")
    if len(omega) < 3:
        raise InsufficientDataError("rate estimator needs at least 3 points")
    dlnf = np.gradient(lnf, omega, edge_order=2)
    if np.any(dlnf >= 0):
        raise DomainError("ln F is not decreasing across the window; rate estimate undefined")
    slope, icept, rms = _ols(z, np.log(-dlnf))
    return 1.0 + slope, icept, rms


def _flags(alpha, rms, lnf_top, estimator):
    out = []
    if not 0.0 < alpha < 1.0:
        out.append("alpha_out_of_range")
    if rms > NONLINEAR_RMS:
        out.append("nonlinear")
    if estimator == "direct" and lnf_top < MIN_LN_F:
        out.append("low_ln_f")
    return tuple(out)


def fit_alpha(spectrum: Spectrum, omega_min: float, omega_max: float,
              estimator: str = "direct", allow_small: bool = False) -> AlphaFit:
    """Fit over every grid point in ``[omega_min, omega_max]``."""
    w, f = _window(spectrum, omega_min, omega_max)
    if len(w) < MIN_POINTS:
        raise InsufficientDataError(
            f"window [{omega_min}, {omega_max}] holds {len(w)} points, need {MIN_POINTS}")
    alpha, icept, rms = fit_points(w, f, estimator, allow_small)
    return AlphaFit(alpha, icept, float(omega_min), float(omega_max), "direct", rms,
                    len(w), estimator, _flags(alpha, rms, float(np.log(f[-1])), estimator))


def _vertex(x, y):
    # parabola through three points; returns (x_v, y_v) or None
    (x0, x1, x2), (y0, y1, y2) = x, y
    d = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d
    if a == 0:
        return None
    xv = -b / (2 * a)
    if not x0 <= xv <= x2:
        return None
    c = y1 - a * x1 * x1 - b * x1
    return xv, a * xv * xv + b * xv + c


def find_peaks(spectrum: Spectrum, omega_min: float, omega_max: float) -> PeakSet:
    """Interior local maxima and minima of ``F`` in the window.

    Runs of equal values are merged and a plateau extremum is placed at its
    midpoint. Isolated extrema are refined by a parabola through ``ln F`` at
    the point and its two neighbours.
    """
    w, f = _window(spectrum, omega_min, omega_max)
    if len(w) < MIN_PEAK_POINTS:
        raise InsufficientDataError(
            f"window [{omega_min}, {omega_max}] holds {len(w)} points, need {MIN_PEAK_POINTS}")
    # consolidate plateaus into runs [start, stop)
    starts = np.concatenate(([0], np.flatnonzero(np.diff(f) != 0) + 1))
    stops = np.concatenate((starts[1:], [len(f)]))
    vals = f[starts]
    lnf = np.log(np.maximum(f, np.finfo(float).tiny))
    peaks, troughs = [], []
    for j in range(1, len(starts) - 1):
        lo, hi = vals[j - 1], vals[j + 1]
        if vals[j] > lo and vals[j] > hi:
            target = peaks
        elif vals[j] < lo and vals[j] < hi:
            target = troughs
        else:
            continue
        i0, i1 = starts[j], stops[j]
        if i1 - i0 > 1:
            target.append((0.5 * (w[i0] + w[i1 - 1]), float(vals[j])))
            continue
        v = _vertex(w[i0 - 1:i0 + 2], lnf[i0 - 1:i0 + 2])
        if v is None:
            target.append((float(w[i0]), float(f[i0])))
        else:
            target.append((float(v[0]), float(math.exp(v[1]))))
    return PeakSet(peaks, troughs)


def fit_alpha_peaks(spectrum: Spectrum, omega_min: float, omega_max: float,
                    estimator: str = "direct", allow_small: bool = False) -> AlphaFit:
    """Fit through the peak line of an oscillating spectrum."""
    ps = find_peaks(spectrum, omega_min, omega_max)
    if len(ps) < MIN_PEAKS:
        raise InsufficientDataError(
            f"{len(ps)} peaks in [{omega_min}, {omega_max}], need {MIN_PEAKS}; "
            "use the direct method")
    w, f = ps.peak_omega, ps.peak_f
    alpha, icept, rms = fit_points(w, f, estimator, allow_small)
    return AlphaFit(alpha, icept, float(omega_min), float(omega_max), "peaks", rms,
                    len(w), estimator, _flags(alpha, rms, float(np.log(f[-1])), estimator))


def fit_alpha_auto(spectrum: Spectrum, omega_min: float, omega_max: float,
                   estimator: str = "direct", prefer_peaks: bool = True) -> AlphaFit:
    """Peak-line fit when at least three peaks are present, else the direct fit."""
    if prefer_peaks:
        w, _ = _window(spectrum, omega_min, omega_max)
        if len(w) >= MIN_PEAK_POINTS and len(find_peaks(spectrum, omega_min, omega_max)) >= MIN_PEAKS:
            return fit_alpha_peaks(spectrum, omega_min, omega_max, estimator)
    return fit_alpha(spectrum, omega_min, omega_max, estimator)


def oscillation_amplitude(spectrum: Spectrum, omega_min: float, omega_max: float) -> float:
    """Largest fractional dip ``1 - F_trough / F_peak`` in the window.

    The trough level under each peak is interpolated (in ``ln F``, linear in
    ``w``) between the troughs on either side, so the mean decay of the
    spectrum between a peak and its neighbour is not counted as oscillation.
    With a trough on one side only, that trough is used. Zero without peaks.
    """
    w, _ = _window(spectrum, omega_min, omega_max)
    if len(w) < MIN_PEAK_POINTS:
        return 0.0
    ps = find_peaks(spectrum, omega_min, omega_max)
    if not ps.peaks or not ps.troughs:
        return 0.0
    tw = np.array([t[0] for t in ps.troughs])
    tl = np.log([t[1] for t in ps.troughs])
    best = 0.0
    for wp, fp in ps.peaks:
        left = np.flatnonzero(tw < wp)
        right = np.flatnonzero(tw > wp)
        if len(left) and len(right):
            i, j = left[-1], right[0]
            s = (wp - tw[i]) / (tw[j] - tw[i])
            level = math.exp((1 - s) * tl[i] + s * tl[j])
        else:
            level = math.exp(tl[left[-1]] if len(left) else tl[right[0]])
        best = max(best, (fp - level) / fp)
    return max(best, 0.0)


def fit_alpha_split(spectrum: Spectrum, omega_min: float, omega_max: float,
                    estimator: str = "direct"):
    """Full-window fit plus fits over the lower and upper halves of the window."""
    mid = 0.5 * (omega_min + omega_max)
    return (fit_alpha(spectrum, omega_min, omega_max, estimator),
            fit_alpha(spectrum, omega_min, mid, estimator),
            fit_alpha(spectrum, mid, omega_max, estimator))


def write_json(fit: AlphaFit, path):
    return atomic_write(path, lambda fh: json.dump(fit.to_dict(), fh, indent=1))


def read_json(path) -> AlphaFit:
    with open(path, encoding="utf-8") as fh:
        return AlphaFit.from_dict(json.load(fh))
