"""pulse-spectra command line.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (including failed
verification checks), 3 file-system errors. Effective settings go to stderr
as a ``# settings`` JSON line; summaries go to stdout; artifacts only to
``--out`` files, written atomically.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import appendix, fluctuation, rate_model, specfit, spectrum, sweep
from .errors import DomainError, NumericalError
from .io import atomic_write
from .pump import PumpSpec

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # bad flags are a validation failure (exit 1), not argparse's usage exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise DomainError(f"{self.prog}: {message}")


def _settings(ns, skip=("func", "command", "kind")):
    d = {k: v for k, v in vars(ns).items() if k not in skip}
    print("# settings " + json.dumps(d, sort_keys=True, default=str), file=sys.stderr)


def _add_sim(p):
    g = p.add_argument_group("model (times in pump durations)")
    g.add_argument("--n0", type=float, default=1e7, help="pump photon number N0 (> 0)")
    g.add_argument("--c", type=float, default=1e-4, help="coupling C, dimensionless")
    g.add_argument("--r", type=float, default=2.0, help="cavity escape rate, 1/pump duration")
    g.add_argument("--eta", type=float, default=1.0, help="re-absorption weight in [0, 1]")
    g.add_argument("--nu", type=float, default=1.0, help="pump shape exponent (> 0)")
    g.add_argument("--t-end", type=float, default=rate_model.DEFAULT_T_END,
                   help="integration end, pump durations (>= 1)")
    g.add_argument("--rel-tol", type=float, default=rate_model.DEFAULT_REL_TOL)
    g.add_argument("--abs-tol", type=float, default=rate_model.DEFAULT_ABS_TOL,
                   help="photons for x; scaled by N0 for the atom number")
    g.add_argument("--integrator", choices=("auto", "dopri5", "radau"), default="auto")


def _add_grid(p):
    g = p.add_argument_group("frequency grid (1/pump duration)")
    g.add_argument("--omega-min", type=float, default=50.0)
    g.add_argument("--omega-max", type=float, default=100.0)
    g.add_argument("--points", type=int, default=256, help="log-spaced grid points")
    g.add_argument("--include-r-factor", action="store_true",
                   help="transform r*x(t) instead of x(t)")
    g.add_argument("--samples-per-period", type=int, default=16)
    g.add_argument("--rel-target", type=float, default=1e-6,
                   help="quadrature relative error target")
    g.add_argument("--workers", type=int, default=1)


def _params(ns):
    return rate_model.RateParams(n0=ns.n0, c=ns.c, r=ns.r, eta=ns.eta, pump=PumpSpec(nu=ns.nu))


def _simulate(ns):
    return rate_model.simulate(_params(ns), ns.t_end, ns.rel_tol, ns.abs_tol, ns.integrator)


def _spectrum(ns, traj=None):
    if ns.points < 2:
        raise DomainError(f"--points must be at least 2, got {ns.points}")
    grid = spectrum.default_omega_grid(ns.omega_min, ns.omega_max, n_points=ns.points)
    traj = traj or _simulate(ns)
    qs = spectrum.QuadratureSettings(samples_per_period=ns.samples_per_period,
                                     rel_target=ns.rel_target, workers=ns.workers)
    spec = spectrum.transform_grid(traj, grid, qs)
    if ns.include_r_factor:
        spec = spec.scaled(ns.r)
    return spec


def cmd_simulate(ns):
    traj = _simulate(ns)
    t_max, x_max = rate_model.peak(traj)
    t_on = rate_model.switch_on_time(traj)
    d = traj.diagnostics
    print(f"peak x = {x_max:.6g} at t = {t_max:.6f}")
    print(f"switch-on (1% of peak) t = {t_on:.6f}")
    print(f"balance residual max = {d['max_balance_residual']:.3g}  "
          f"({d['method']}, {d['steps']} steps, {d['rejected']} rejected)")
    if ns.out:
        rate_model.write_csv(traj, ns.out, ns.samples)
        print(f"wrote {ns.out}")
    return EXIT_OK


def cmd_spectrum(ns):
    spec = _spectrum(ns)
    ln = spec.ln_f
    print(f"{len(spec)} frequencies in [{ns.omega_min:g}, {ns.omega_max:g}]: "
          f"ln F {ln[0]:.4f} -> {ln[-1]:.4f}, "
          f"quadrature error {spec.source['max_rel_error']:.2g}")
    for w in spec.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if ns.out:
        writer = spectrum.write_json if str(ns.out).endswith(".json") else spectrum.write_csv
        writer(spec, ns.out)
        print(f"wrote {ns.out}")
    return EXIT_OK


def cmd_fit(ns):
    if ns.spectrum:
        spec = spectrum.read_csv(ns.spectrum)
    else:
        spec = _spectrum(ns)
    lo, hi = ns.omega_min, ns.omega_max
    if ns.method == "direct":
        fit = specfit.fit_alpha(spec, lo, hi, ns.estimator)
    elif ns.method == "peaks":
        fit = specfit.fit_alpha_peaks(spec, lo, hi, ns.estimator)
    else:
        fit = specfit.fit_alpha_auto(spec, lo, hi, ns.estimator, prefer_peaks=ns.eta != 1.0)
    p, e = (fluctuation.omega_alpha_measure(hi, fit.alpha) if fit.accepted
            else (math.nan, math.nan))
    print(f"alpha = {fit.alpha:.4f} ({fit.method}/{fit.estimator}, {fit.n_points} points, "
          f"rms {fit.rms_residual:.3g}) omega_max^alpha = {p:.3g}, exp(-.) = {e:.3g}")
    if fit.flags:
        print("flags: " + ", ".join(fit.flags))
    if ns.out:
        specfit.write_json(fit, ns.out)
        print(f"wrote {ns.out}")
    return EXIT_OK


def cmd_sweep(ns):
    if bool(ns.preset) == bool(ns.config):
        raise DomainError("give exactly one of --preset and --config")
    if ns.preset:
        cfg = sweep.preset(ns.preset, outdir=ns.outdir, workers=ns.workers)
    else:
        cfg = sweep.load_config(ns.config)
        if ns.outdir != "runs":
            cfg.outdir = ns.outdir
        if ns.workers != 1:
            cfg.workers = ns.workers
    sweep.check_writable(cfg.outdir)
    t0 = time.perf_counter()
    rows = sweep.run_table(cfg, check_outdir=False)
    target = sweep.write_outputs(rows, cfg, {"total_s": time.perf_counter() - t0})
    for r in rows:
        print(f"{cfg.axis}={getattr(r, cfg.axis):<10g} [{r.omega_min:g}, {r.omega_max:g}] "
              f"alpha={r.alpha:.4f} {r.method:<7} osc={r.osc_fraction:.3g} "
              f"{';'.join(r.flags)}")
    print(f"wrote {target}")
    return EXIT_NUMERICAL if any(r.failed for r in rows) else EXIT_OK


def cmd_estimate(ns):
    if ns.kind == "tail":
        tp = fluctuation.TailParams(ns.alpha, ns.b, ns.c0)
        out = {"inputs": {"alpha": ns.alpha, "b": ns.b, "c0": ns.c0, "u": ns.u},
               "note": "relative/asymptotic: b and c0 are not calibrated"}
        if ns.u is not None:
            out["pdf"] = fluctuation.tail_pdf(ns.u, tp)
            out["ccdf"] = fluctuation.tail_ccdf(ns.u, tp)
        if ns.omega_max is not None:
            p, e = fluctuation.omega_alpha_measure(ns.omega_max, ns.alpha)
            out["inputs"]["omega_max"] = ns.omega_max
            out["omega_max_pow_alpha"] = p
            out["exp_minus"] = e
    elif ns.kind == "scattering":
        out = {"inputs": {"u": ns.u, "length_um": ns.length_um, "sound_speed": ns.sound_speed,
                          "wavelength_nm": ns.wavelength_nm, "temperature": ns.temperature},
               "ratio": fluctuation.scattering_ratio(ns.u, ns.length_um, ns.sound_speed,
                                                     ns.wavelength_nm, ns.temperature)}
    else:
        pu = fluctuation.lifetime_to_pulse_scale(ns.c, ns.tau_life, ns.wavelength)
        out = {"inputs": {"c": ns.c, "tau_life": ns.tau_life, "wavelength": ns.wavelength},
               "tau_s": pu.tau, "pulse_length_m": pu.pulse_length,
               "oscillations": pu.oscillations}
    text = json.dumps(out, indent=1)
    print(text)
    if ns.out:
        atomic_write(ns.out, lambda fh: fh.write(text + "\n"))
    return EXIT_OK


def cmd_verify(ns):
    rep = appendix.run(ns.nu, ns.omega_min, ns.omega_max, ns.step)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<18} {c.value:.4g}  ({c.target})")
    print(f"nu={rep.nu:g}: {'all checks passed' if rep.passed else 'some checks failed'}")
    if ns.out:
        atomic_write(ns.out, lambda fh: json.dump(rep.to_dict(), fh, indent=1))
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pulse-spectra", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate the rate equations, write t,x,a CSV")
    _add_sim(p)
    p.add_argument("--samples", type=int, default=None,
                   help="uniform samples instead of solver nodes")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="transform x(t) on a log-spaced grid")
    _add_sim(p)
    _add_grid(p)
    p.add_argument("--out", type=Path, help=".csv or .json")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", help="fit alpha from a spectrum CSV or a fresh run")
    _add_sim(p)
    _add_grid(p)
    p.add_argument("--spectrum", type=Path, help="spectrum CSV (omega, f_mag columns)")
    p.add_argument("--method", choices=("auto", "direct", "peaks"), default="auto")
    p.add_argument("--estimator", choices=specfit.METHODS, default="direct")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="run a preset table or a JSON config")
    p.add_argument("--preset", choices=sorted(sweep.PRESETS))
    p.add_argument("--config", type=Path)
    p.add_argument("--outdir", default="runs")
    p.add_argument("--workers", type=int, default=1,
                   help=f"thread cap; {sweep.THREADS_ENV} lowers it further")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="tail, scattering and time-scale estimates")
    est = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    q = est.add_parser("tail", help="c0 exp(-b u^alpha) and its ccdf")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--b", type=float, default=1.0)
    q.add_argument("--c0", type=float, default=1.0)
    q.add_argument("--u", type=float, default=None, help="variance-normalized outcome")
    q.add_argument("--omega-max", type=float, default=None, help="1/pulse time scale")
    q.add_argument("--out", type=Path)
    q = est.add_parser("scattering", help="photons scattered relative to the reference case")
    q.add_argument("--u", type=float, default=1.0)
    q.add_argument("--length-um", type=float, default=fluctuation.REF_PULSE_LENGTH_UM,
                   help="pulse length, micrometres")
    q.add_argument("--sound-speed", type=float, default=fluctuation.REF_SOUND_SPEED_MPS,
                   help="m/s")
    q.add_argument("--wavelength-nm", type=float, default=fluctuation.REF_WAVELENGTH_NM,
                   help="nanometres")
    q.add_argument("--temperature", type=float, default=fluctuation.REF_TEMPERATURE_K,
                   help="kelvin")
    q.add_argument("--out", type=Path)
    q = est.add_parser("lifetime", help="pulse time scale and length from a radiative lifetime")
    q.add_argument("--c", type=float, required=True, help="coupling C, dimensionless")
    q.add_argument("--tau-life", type=float, required=True, help="seconds")
    q.add_argument("--lambda", dest="wavelength", type=float, default=570e-9, help="metres")
    q.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="tail properties of the pump spectrum")
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--omega-min", type=float, default=20.0, help="alpha_in fit start")
    p.add_argument("--omega-max", type=float, default=320.0, help="grid end")
    p.add_argument("--step", type=float, default=0.05, help="grid spacing")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _settings(ns)
    try:
        return ns.func(ns)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
