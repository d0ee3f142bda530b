"""Parameter sweeps: simulate, transform and fit, one row per (case, window).

Each distinct parameter set is integrated once and all of its windows are
evaluated on that trajectory. Groups run in a thread pool; rows come back in
configuration order regardless of scheduling.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
import platform
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import rate_model, specfit, spectrum
from .errors import DomainError
from .fluctuation import omega_alpha_measure
from .io import atomic_write
from .pump import PumpSpec
from .rate_model import RateParams
from .spectrum import QuadratureSettings

log = logging.getLogger(__name__)

AXES = ("n0", "c", "r", "eta")
CSV_COLUMNS = ("n0", "c", "r", "eta", "omega_min", "omega_max", "alpha", "method",
               "omega_max_pow_alpha", "osc_fraction", "rms_residual", "flags")
THREADS_ENV = "PULSE_SPECTRA_THREADS"


@dataclass(frozen=True)
class RunSettings:
    t_end: float = rate_model.DEFAULT_T_END
    rel_tol: float = rate_model.DEFAULT_REL_TOL
    abs_tol: float = rate_model.DEFAULT_ABS_TOL
    integrator: str = "auto"
    points: int = 256
    estimator: str = "direct"
    include_r_factor: bool = False
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)

    def __post_init__(self):
        if self.points < specfit.MIN_POINTS:
            raise DomainError(f"points per window must be >= {specfit.MIN_POINTS}")
        if self.estimator not in specfit.METHODS:
            raise DomainError(f"unknown estimator {self.estimator!r}")
        if isinstance(self.quadrature, dict):
            object.__setattr__(self, "quadrature", QuadratureSettings(**self.quadrature))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepConfig:
    base: RateParams = field(default_factory=RateParams)
    axis: str = "n0"
    values: list = field(default_factory=list)
    # one window list per value, or a single list shared by all values
    windows: list = field(default_factory=list)
    settings: RunSettings = field(default_factory=RunSettings)
    outdir: str = "runs"
    workers: int = 1
    name: str | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise DomainError("sweep axis has no values")
        if not self.windows:
            raise DomainError("no fit windows given")
        if _is_window(self.windows[0]):
            self.windows = [list(self.windows)] * len(self.values)
        if len(self.windows) != len(self.values):
            raise DomainError("need one window list per axis value")
        for ws in self.windows:
            if not ws:
                raise DomainError("empty window list")
            for w in ws:
                if not (_is_window(w) and 0 < w[0] < w[1]):
                    raise DomainError(f"invalid window {w!r}")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")
        for v in self.values:
            self.params_for(v)  # validates

    def params_for(self, value) -> RateParams:
        return dataclasses.replace(self.base, **{self.axis: float(value)})

    def cases(self):
        return [(self.params_for(v), [tuple(map(float, w)) for w in ws])
                for v, ws in zip(self.values, self.windows)]

    def to_dict(self) -> dict:
        return {"name": self.name, "base": self.base.as_dict(), "axis": self.axis,
                "values": list(self.values),
                "windows": [[list(w) for w in ws] for ws in self.windows],
                "settings": self.settings.as_dict(), "workers": self.workers,
                "outdir": self.outdir}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {"name", "base", "axis", "values", "windows", "settings", "workers", "outdir"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        b = dict(d.get("base", {}))
        nu = b.pop("nu", 1.0)
        base = RateParams(pump=PumpSpec(nu=nu), **b)
        st = d.get("settings", {})
        return cls(base=base, axis=d.get("axis", "n0"), values=list(d.get("values", [])),
                   windows=d.get("windows", []), settings=RunSettings(**st),
                   outdir=d.get("outdir", "runs"), workers=int(d.get("workers", 1)),
                   name=d.get("name"))

    def run_id(self) -> str:
        d = self.to_dict()
        d.pop("outdir")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _is_window(w) -> bool:
    return (isinstance(w, (list, tuple)) and len(w) == 2
            and all(isinstance(v, (int, float)) for v in w))


@dataclass
class ResultRow:
    n0: float
    c: float
    r: float
    eta: float
    nu: float
    omega_min: float
    omega_max: float
    alpha: float = math.nan
    method: str = "failed"
    omega_max_pow_alpha: float = math.nan
    osc_fraction: float = math.nan
    rms_residual: float = math.nan
    flags: tuple = ()
    wall_time: float = 0.0
    n_peaks: int = 0
    alpha_lower: float = math.nan
    alpha_upper: float = math.nan
    switch_on: float = math.nan
    t_peak: float = math.nan
    x_max: float = math.nan
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRow":
        d = dict(d)
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)

    def csv_record(self) -> list:
        out = []
        for k in CSV_COLUMNS:
            v = getattr(self, k)
            if k == "flags":
                out.append(";".join(v))
            elif isinstance(v, float):
                out.append(f"{v:.17g}")
            else:
                out.append(str(v))
        return out


def _simulate(params: RateParams, settings: RunSettings):
    return rate_model.simulate(params, settings.t_end, settings.rel_tol, settings.abs_tol,
                               settings.integrator)


def run_case(params: RateParams, window, settings: RunSettings | None = None,
             trajectory=None) -> ResultRow:
    """One table row. Errors are captured in the row, tagged with the failing stage."""
    settings = settings or RunSettings()
    w0, w1 = map(float, window)
    row = ResultRow(params.n0, params.c, params.r, params.eta, params.pump.nu, w0, w1)
    t_start = time.perf_counter()
    stage = "simulate"
    flags = []
    try:
        traj = trajectory if trajectory is not None else _simulate(params, settings)
        row.t_peak, row.x_max = rate_model.peak(traj)
        row.switch_on = rate_model.switch_on_time(traj)
        stage = "transform"
        grid = spectrum.default_omega_grid(w0, w1, n_points=settings.points)
        spec = spectrum.transform_grid(traj, grid, settings.quadrature)
        if settings.include_r_factor:
            spec = spec.scaled(params.r)
        if spec.warnings:
            flags.append("truncation")
        stage = "fit"
        peaks = specfit.find_peaks(spec, w0, w1)
        row.n_peaks = len(peaks)
        use_peaks = params.eta != 1.0 and len(peaks) >= specfit.MIN_PEAKS
        fit = (specfit.fit_alpha_peaks if use_peaks else specfit.fit_alpha)(
            spec, w0, w1, settings.estimator)
        row.alpha, row.method, row.rms_residual = fit.alpha, fit.method, fit.rms_residual
        flags.extend(fit.flags)
        row.osc_fraction = specfit.oscillation_amplitude(spec, w0, w1)
        _, lo, hi = specfit.fit_alpha_split(spec, w0, w1, settings.estimator)
        row.alpha_lower, row.alpha_upper = lo.alpha, hi.alpha
        if fit.accepted:
            row.omega_max_pow_alpha = omega_alpha_measure(w1, fit.alpha)[0]
    except Exception as exc:  # isolate the row; the sweep carries on
        row.method = "failed"
        row.error = f"{stage}: {type(exc).__name__}: {exc}"
        flags.append(f"failed_{stage}")
        log.warning("row n0=%g c=%g r=%g eta=%g [%g, %g] failed: %s",
                    params.n0, params.c, params.r, params.eta, w0, w1, row.error)
    row.flags = tuple(flags)
    row.wall_time = time.perf_counter() - t_start
    return row


def _run_group(params, windows, settings):
    t0 = time.perf_counter()
    try:
        traj = _simulate(params, settings)
    except Exception as exc:
        rows = []
        for w in windows:
            row = ResultRow(params.n0, params.c, params.r, params.eta, params.pump.nu, *w,
                            flags=("failed_simulate",),
                            error=f"simulate: {type(exc).__name__}: {exc}")
            rows.append(row)
        return rows
    sim_time = time.perf_counter() - t0
    rows = [run_case(params, w, settings, trajectory=traj) for w in windows]
    for row in rows:
        row.wall_time += sim_time / len(rows)
    return rows


def worker_cap(requested: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if cap < 1:
            raise DomainError(f"{THREADS_ENV} must be at least 1")
        return max(1, min(requested, cap))
    return max(1, requested)


def check_writable(path) -> Path:
    """Create ``path`` if needed and prove a file can be written there."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path, prefix=".probe."):
            pass
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


def run_table(config: SweepConfig, check_outdir: bool = True) -> list:
    if check_outdir:
        check_writable(config.outdir)
    cases = config.cases()
    workers = worker_cap(config.workers)
    if workers == 1 or len(cases) == 1:
        groups = [_run_group(p, ws, config.settings) for p, ws in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(lambda c: _run_group(c[0], c[1], config.settings), cases))
    return [row for g in groups for row in g]


def export(rows, path, fmt: str = "csv", config: SweepConfig | None = None) -> Path:
    if not rows:
        raise DomainError("nothing to export")
    if fmt == "csv":
        def body(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in rows:
                w.writerow(row.csv_record())
        return atomic_write(path, body)
    if fmt == "json":
        doc = {"rows": [r.to_dict() for r in rows]}
        if config is not None:
            doc = {"run_id": config.run_id(), "config": config.to_dict(), **doc}
        return atomic_write(path, lambda fh: json.dump(doc, fh, indent=1))
    raise DomainError(f"unknown export format {fmt!r}")


def load_rows(path) -> list:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return [ResultRow.from_dict(d) for d in doc["rows"]]


def write_outputs(rows, config: SweepConfig, timings: dict | None = None) -> Path:
    """``rows.csv``, ``rows.json`` and ``meta.json`` under ``outdir/<name or run id>``."""
    target = Path(config.outdir) / (config.name or config.run_id())
    check_writable(target)
    export(rows, target / "rows.csv", "csv")
    export(rows, target / "rows.json", "json", config)
    meta = {
        "run_id": config.run_id(),
        "config": config.to_dict(),
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "timings": timings or {},
        "failed_rows": sum(r.failed for r in rows),
    }
    atomic_write(target / "meta.json", lambda fh: json.dump(meta, fh, indent=1))
    return target


def load_config(path) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON: {exc}") from None
    return SweepConfig.from_dict(doc)


_W12 = [(50, 100), (100, 150)]

PRESETS = {
    "table1": dict(axis="n0", base=RateParams(eta=1.0),
                   values=[1e7, 1e8, 1e9, 1e10, 1e11, 1e12],
                   windows=[[(50, 100), (100, 150), (150, 200)],
                            [(100, 300), (500, 600)],
                            [(50, 500), (1500, 1600)],
                            [(50, 900)], [(50, 900)], [(50, 900)]]),
    "table2": dict(axis="n0", base=RateParams(eta=0.0),
                   values=[1e7, 1e8, 1e9, 1e10, 1e11, 1e12],
                   windows=[[(51, 96)], [(200, 240)], [(250, 300)],
                            [(250, 300)], [(400, 500)], [(600, 800)]]),
    "table3": dict(axis="c", base=RateParams(eta=1.0),
                   values=[1e-5, 10 ** -4.5, 1e-4, 1e-3, 1e-2, 1e-1],
                   windows=[_W12] * 6),
    "table4": dict(axis="r", base=RateParams(eta=1.0),
                   values=[4.0, 3.0, 2.0, 1.5, 1.0, 0.8, 0.4, 0.2],
                   windows=[[(50, 100)]] * 8),
    "fig4": dict(axis="n0", base=RateParams(eta=1.0),
                 values=[1e7, 1e8, 1e9, 1e10, 1e11, 1e12],
                 windows=[[(50, 100)]] * 6),
}

# reference values as printed, keyed like the preset rows
REFERENCE = {
    "table1": [0.11, 0.14, 0.18, 0.11, 0.11, 0.13, 0.19, 0.13, 0.12, 0.11],
    "table1_pow": [1.7, 2.0, 2.6, 1.9, 2.0, 2.2, 4.1, 2.4, 2.3, 2.1],
    "table2": [0.097, 0.087, 0.071, 0.061, 0.055, 0.050],
    "table2_osc": [0.17, 0.012, 0.001, None, None, None],
    "table3": [0.24, 0.50, 0.13, 0.20, 0.11, 0.12, 0.16, 0.15, 0.22, 0.23, 0.23, 0.26],
    "table4": [0.12, 0.13, 0.11, 0.12, 0.11, 0.12, (0.12, 0.11), (0.13, 0.066)],
}


def preset(name: str, **overrides) -> SweepConfig:
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = dict(PRESETS[name], name=name)
    kw.update(overrides)
    return SweepConfig(**kw)
