"""Cosine, sine and magnitude transforms of a compactly supported envelope.

    F_C(w) = int_0^T cos(w t) x(t) dt,   F_S(w) = int_0^T sin(w t) x(t) dt,
    F(w) = sqrt(F_C^2 + F_S^2)

The envelope is sampled once on composite Gauss-Legendre panels. Panel edges
include the envelope's own breakpoints (the integrator's accepted steps for a
:class:`~pulse_spectra.rate_model.Trajectory`), so every panel sees a single
polynomial piece, and no panel is wider than ``2 pi / (samples_per_period w_max)``.
The quadrature error is estimated by repeating the sum with every panel halved.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError
from .io import atomic_write

# elements per (frequency x sample) block handed to numpy at once
_BLOCK = 2_000_000


@dataclass(frozen=True)
class QuadratureSettings:
    samples_per_period: int = 16
    gauss_nodes: int = 8
    rel_target: float = 1e-6
    max_refinements: int = 3
    # converged when |dF| <= max(rel_target F, abs_floor int |x| dt); the
    # absolute part sits just above double-precision cancellation noise
    abs_floor: float = 1e-14
    workers: int = 1

    def __post_init__(self):
        if self.samples_per_period < 2:
            raise DomainError("samples_per_period must be at least 2")
        if self.gauss_nodes < 2:
            raise DomainError("gauss_nodes must be at least 2")
        if not self.rel_target > 0:
            raise DomainError("rel_target must be positive")
        if self.max_refinements < 0:
            raise DomainError("max_refinements must be non-negative")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")


@dataclass
class Spectrum:
    omega: np.ndarray
    f_c: np.ndarray
    f_s: np.ndarray
    f_mag: np.ndarray
    source: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    error_estimate: np.ndarray | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.f_c = np.asarray(self.f_c, dtype=float)
        self.f_s = np.asarray(self.f_s, dtype=float)
        self.f_mag = np.asarray(self.f_mag, dtype=float)
        n = len(self.omega)
        if not (len(self.f_c) == len(self.f_s) == len(self.f_mag) == n):
            raise DomainError("spectrum columns differ in length")
        if n and (np.any(self.omega < 0) or np.any(np.diff(self.omega) <= 0)):
            raise DomainError("omega must be non-negative and strictly increasing")

    def __len__(self):
        return len(self.omega)

    @property
    def ln_f(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.f_mag)

    def window(self, omega_min: float, omega_max: float) -> "Spectrum":
        m = (self.omega >= omega_min) & (self.omega <= omega_max)
        err = None if self.error_estimate is None else self.error_estimate[m]
        return Spectrum(self.omega[m], self.f_c[m], self.f_s[m], self.f_mag[m],
                        dict(self.source), list(self.warnings), err)

    def scaled(self, factor: float) -> "Spectrum":
        """All transforms multiplied by ``factor`` (e.g. the escape rate ``r``)."""
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        src = dict(self.source, scale=self.source.get("scale", 1.0) * factor)
        return Spectrum(self.omega, self.f_c * factor, self.f_s * factor,
                        self.f_mag * factor, src, list(self.warnings), self.error_estimate)


def default_omega_grid(omega_min: float, omega_max: float,
                       points_per_decade: int | None = None,
                       n_points: int | None = None) -> np.ndarray:
    """Log-spaced frequencies from ``omega_min`` to ``omega_max`` inclusive.

    Give either ``points_per_decade`` or the total ``n_points``.
    """
    if not (0 < omega_min < omega_max) or not math.isfinite(omega_max):
        raise DomainError(f"need 0 < omega_min < omega_max, got {omega_min}, {omega_max}")
    if (points_per_decade is None) == (n_points is None):
        raise DomainError("give exactly one of points_per_decade and n_points")
    if n_points is None:
        if points_per_decade < 1:
            raise DomainError("points_per_decade must be positive")
        decades = math.log10(omega_max / omega_min)
        n_points = int(round(points_per_decade * decades)) + 1
    if n_points < 2:
        raise DomainError(f"need at least 2 grid points, got {n_points}")
    grid = np.geomspace(omega_min, omega_max, n_points)
    grid[0], grid[-1] = omega_min, omega_max
    return grid


def _resolve(envelope, t_end, breakpoints):
    # a Trajectory carries its own support and step mesh
    if t_end is None:
        t_end = getattr(envelope, "t_end", None)
    if t_end is None:
        raise DomainError("t_end is required for a plain callable envelope")
    if breakpoints is None:
        breakpoints = getattr(envelope, "breakpoints", None)
    pts = [0.0, float(t_end)]
    if breakpoints is not None:
        pts.extend(np.asarray(breakpoints, dtype=float).tolist())
    pts = np.unique(np.clip(np.asarray(pts), 0.0, t_end))
    return float(t_end), pts


def _panels(points, hmax):
    widths = np.diff(points)
    counts = np.maximum(1, np.ceil(widths / hmax).astype(int))
    edges = [np.linspace(a, b, k + 1)[:-1] for a, b, k in zip(points[:-1], points[1:], counts)]
    return np.concatenate(edges + [points[-1:]])


def _nodes(edges, n):
    gx, gw = np.polynomial.legendre.leggauss(n)
    left = edges[:-1, None]
    width = np.diff(edges)[:, None]
    t = (left + 0.5 * width * (gx + 1.0)).ravel()
    w = (0.5 * width * gw).ravel()
    return t, w


def _sums(omega, t, wx, workers):
    """Weighted cosine and sine sums for every frequency."""
    fc = np.empty(len(omega))
    fs = np.empty(len(omega))
    chunk = max(1, _BLOCK // max(len(t), 1))
    starts = range(0, len(omega), chunk)

    def run(i0):
        w = omega[i0:i0 + chunk, None]
        ph = w * t[None, :]
        # np.sum along a contiguous axis uses pairwise summation
        fc[i0:i0 + chunk] = np.sum(np.cos(ph) * wx, axis=1)
        fs[i0:i0 + chunk] = np.sum(np.sin(ph) * wx, axis=1)

    if workers > 1 and len(omega) > chunk:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for i0 in starts:
            run(i0)
    return fc, fs


def transform_grid(envelope, omega_grid, settings: QuadratureSettings | None = None,
                   t_end: float | None = None, breakpoints=None) -> Spectrum:
    """Transforms of ``envelope`` on ``[0, t_end]`` at every frequency in the grid."""
    settings = settings or QuadratureSettings()
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1:
        raise DomainError("omega grid must be one-dimensional")
    if len(omega) and (np.any(omega < 0) or np.any(np.diff(omega) <= 0)
                       or not np.all(np.isfinite(omega))):
        raise DomainError("omega grid must be finite, non-negative and strictly increasing")
    t_end, points = _resolve(envelope, t_end, breakpoints)
    params = getattr(envelope, "params", None)
    source = {"t_end": t_end, "settings": asdict(settings),
              "envelope": params.as_dict() if params is not None else type(envelope).__name__}
    if len(omega) == 0:
        return Spectrum(omega, omega, omega, omega, source, [], omega.copy())

    w_max = float(omega[-1])
    hmax = t_end / 64.0
    if w_max > 0:
        hmax = min(hmax, 2.0 * math.pi / (settings.samples_per_period * w_max))
    edges = _panels(points, hmax)

    def evaluate(edges):
        t, w = _nodes(edges, settings.gauss_nodes)
        x = np.asarray(envelope(t), dtype=float)
        if not np.all(np.isfinite(x)):
            raise NumericalError("envelope is not finite on [0, t_end]")
        wx = w * x
        fc, fs = _sums(omega, t, wx, settings.workers)
        return fc, fs, float(np.sum(np.abs(wx)))

    fc0, fs0, mass = evaluate(edges)
    achieved = None
    for level in range(settings.max_refinements + 1):
        mids = 0.5 * (edges[:-1] + edges[1:])
        fine = np.empty(2 * len(edges) - 1)
        fine[0::2] = edges
        fine[1::2] = mids
        fc1, fs1, mass = evaluate(fine)
        mag = np.hypot(fc1, fs1)
        floor = settings.abs_floor * mass / settings.rel_target
        diff = np.hypot(fc1 - fc0, fs1 - fs0)
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.where(diff == 0.0, 0.0, diff / np.maximum(mag, floor))
        achieved = float(err.max())
        edges, fc0, fs0 = fine, fc1, fs1
        if achieved <= settings.rel_target:
            break
    else:
        worst = int(np.argmax(err))
        raise NumericalError(
            f"quadrature error {achieved:.3g} above target {settings.rel_target:.3g} "
            f"at omega={omega[worst]:.6g} after {settings.max_refinements} refinements",
            achieved=achieved)

    source.update({"panels": len(edges) - 1, "samples": (len(edges) - 1) * settings.gauss_nodes,
                   "max_rel_error": achieved})
    spec = Spectrum(omega, fc0, fs0, np.hypot(fc0, fs0), source, [], err)
    _check_truncation(spec, envelope, t_end)
    return spec


def transform(envelope, omega: float, settings: QuadratureSettings | None = None,
              t_end: float | None = None, breakpoints=None):
    """``(F_C, F_S, F)`` at one frequency."""
    if not omega >= 0:
        raise DomainError(f"omega must be non-negative, got {omega}")
    s = transform_grid(envelope, [float(omega)], settings, t_end, breakpoints)
    return float(s.f_c[0]), float(s.f_s[0]), float(s.f_mag[0])


def _check_truncation(spec: Spectrum, envelope, t_end):
    # a jump of height x(T) at the cut adds roughly x(T)/w to the transform
    w = spec.omega[-1]
    if w <= 0:
        return
    x_end = abs(float(np.asarray(envelope(np.array([t_end])))[0]))
    spec.source["x_end"] = x_end
    if x_end / w >= 1e-3 * spec.f_mag[-1]:
        spec.warnings.append(
            f"truncation: x(t_end)/omega_max = {x_end / w:.3g} is not below "
            f"1e-3 F(omega_max) = {1e-3 * spec.f_mag[-1]:.3g}; increase t_end")


def write_csv(spec: Spectrum, path) -> Path:
    def body(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "f_c", "f_s", "f_mag", "ln_f_mag"])
        for row in zip(spec.omega, spec.f_c, spec.f_s, spec.f_mag, spec.ln_f):
            w.writerow([f"{v:.17g}" for v in row])
    return atomic_write(path, body)


def read_csv(path) -> Spectrum:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not {"omega", "f_mag"} <= set(rows[0]):
        raise DomainError(f"{path}: missing omega/f_mag columns")

    def col(name, default=None):
        if rows and name in rows[0]:
            try:
                return np.array([float(r[name]) for r in rows])
            except (TypeError, ValueError) as exc:
                raise DomainError(f"{path}: bad value in column {name}: {exc}") from None
        return default

    omega = col("omega", np.array([]))
    f_mag = col("f_mag", np.array([]))
    f_c = col("f_c", f_mag)
    f_s = col("f_s", np.zeros_like(f_mag))
    return Spectrum(omega, f_c, f_s, f_mag, {"file": str(path)})


def write_json(spec: Spectrum, path) -> Path:
    doc = {
        "source": spec.source,
        "warnings": spec.warnings,
        "omega": spec.omega.tolist(),
        "f_c": spec.f_c.tolist(),
        "f_s": spec.f_s.tolist(),
        "f_mag": spec.f_mag.tolist(),
    }
    return atomic_write(path, lambda fh: json.dump(doc, fh, indent=1, default=_json_default))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, os.PathLike):
        return os.fspath(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
