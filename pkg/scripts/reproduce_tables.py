"""Run the table presets and print fitted values next to the reference values.

    python3 scripts/reproduce_tables.py [table1 table2 ...] [--outdir runs] [--workers N]
"""
from __future__ import annotations

import argparse
import time

from pulse_spectra import sweep


def fmt_ref(v):
    if v is None:
        return "-"
    if isinstance(v, tuple):
        return " & ".join(f"{x:g}" for x in v)
    return f"{v:g}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", nargs="*", default=["table1", "table2", "table3", "table4"])
    ap.add_argument("--outdir", default="runs")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    for name in args.tables:
        cfg = sweep.preset(name, outdir=args.outdir, workers=args.workers)
        t0 = time.perf_counter()
        rows = sweep.run_table(cfg)
        target = sweep.write_outputs(rows, cfg, {"total_s": time.perf_counter() - t0})
        refs = sweep.REFERENCE.get(name, [None] * len(rows))
        print(f"\n{name}: {len(rows)} rows, {time.perf_counter() - t0:.0f}s -> {target}")
        print(f"{cfg.axis:>8} {'w_min':>6} {'w_max':>6} {'alpha':>7} {'ref':>11} {'method':>7} "
              f"{'w^a':>6} {'osc':>8} {'lower/upper half':>17}  flags")
        for row, ref in zip(rows, refs):
            print(f"{getattr(row, cfg.axis):>8.3g} {row.omega_min:>6g} {row.omega_max:>6g} "
                  f"{row.alpha:>7.4f} {fmt_ref(ref):>11} {row.method:>7} "
                  f"{row.omega_max_pow_alpha:>6.2f} {row.osc_fraction:>8.2g} "
                  f"{row.alpha_lower:>8.3f}/{row.alpha_upper:<8.3f}  {';'.join(row.flags)}")


if __name__ == "__main__":
    main()
