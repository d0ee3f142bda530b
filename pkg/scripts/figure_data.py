"""Write plot-ready CSVs: trajectories, switch-on zooms and ln F curves.

    python3 scripts/figure_data.py --outdir figdata
"""
from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from pulse_spectra import appendix, rate_model, spectrum
from pulse_spectra.pump import PumpSpec, pump_values
from pulse_spectra.rate_model import RateParams


def write(path, header, cols):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([f"{v:.10g}" for v in row])
    print("wrote", path)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="figdata")
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    t = np.linspace(0, 1, 1001)
    write(out / "pump.csv", ["t", "f1", "f2"],
          [t, pump_values(PumpSpec(nu=1.0), t), pump_values(PumpSpec(nu=2.0), t)])

    # photon and atom numbers for both re-absorption settings
    trajs = {eta: rate_model.simulate(RateParams(eta=eta)) for eta in (0.0, 1.0)}
    tt = np.linspace(0, 8, 1601)
    cols, head = [tt], ["t"]
    for eta, tr in trajs.items():
        y = tr.solution(tt)
        cols += [np.maximum(y[:, 0], 0), np.maximum(y[:, 1], 0)]
        head += [f"x_eta{eta:g}", f"a_eta{eta:g}"]
    write(out / "trajectories.csv", head, cols)

    # switch-on zoom, photon number rescaled by 1e7 / N0
    tz = np.linspace(0.45, 0.65, 801)
    cols, head = [tz], ["t"]
    for n0 in (1e7, 1e8, 1e9, 1e10, 1e11, 1e12):
        tr = rate_model.simulate(RateParams(n0=n0))
        cols.append(tr(tz) * 1e7 / n0)
        head.append(f"x_n0_{n0:.0e}")
    write(out / "switch_on.csv", head, cols)

    # ln F for the two default cases and across N0
    grid = spectrum.default_omega_grid(10, 1000, n_points=args.points)
    cols, head = [grid], ["omega"]
    for eta, tr in trajs.items():
        cols.append(spectrum.transform_grid(tr, grid).ln_f)
        head.append(f"lnF_eta{eta:g}")
    write(out / "spectra_default.csv", head, cols)

    grid = spectrum.default_omega_grid(50, 900, n_points=args.points)
    cols, head = [grid], ["omega"]
    for n0 in (1e7, 1e8, 1e9, 1e10, 1e11, 1e12):
        tr = rate_model.simulate(RateParams(n0=n0))
        cols.append(spectrum.transform_grid(tr, grid).ln_f)
        head.append(f"lnF_n0_{n0:.0e}")
    write(out / "spectra_n0.csv", head, cols)

    s = appendix.pump_spectrum(1.0)
    write(out / "pump_spectrum.csv", ["omega", "lnF"], [s.omega, s.ln_f])


if __name__ == "__main__":
    main()
