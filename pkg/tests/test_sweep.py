import dataclasses
import json
import math

import pytest

from pulse_spectra import spectrum, sweep
from pulse_spectra.errors import DomainError
from pulse_spectra.rate_model import RateParams

SMALL = sweep.RunSettings(points=32)


def small_config(tmp_path, **kw):
    d = dict(axis="r", values=[2.0, 1.0], windows=[(50, 60)], settings=SMALL,
             outdir=str(tmp_path), name="small")
    d.update(kw)
    return sweep.SweepConfig(**d)


def test_preset_layouts():
    t1 = sweep.preset("table1")
    pairs = [(p.n0, w) for p, ws in t1.cases() for w in ws]
    assert len(pairs) == 10 == len(sweep.REFERENCE["table1"])
    assert pairs[4] == (1e8, (500.0, 600.0)) and pairs[-1] == (1e12, (50.0, 900.0))
    t3 = sweep.preset("table3")
    assert sum(len(ws) for _, ws in t3.cases()) == 12
    assert sweep.preset("table2").base.eta == 0.0
    assert [p.r for p, _ in sweep.preset("table4").cases()][:6] == [4, 3, 2, 1.5, 1, 0.8]


@pytest.mark.parametrize("kw", [dict(values=[]), dict(axis="nu"), dict(windows=[]),
                                dict(windows=[(60, 50)]), dict(values=[-1.0]),
                                dict(windows=[[(50, 60)]] * 3)])
def test_config_validation(tmp_path, kw):
    with pytest.raises(DomainError):
        small_config(tmp_path, **kw)


def test_unknown_preset():
    with pytest.raises(DomainError):
        sweep.preset("table9")


def test_run_and_export(tmp_path):
    cfg = small_config(tmp_path)
    rows = sweep.run_table(cfg)
    assert [r.r for r in rows] == [2.0, 1.0]
    assert all(not r.failed and 0 < r.alpha < 1 for r in rows)
    assert rows[0].omega_max_pow_alpha == pytest.approx(60 ** rows[0].alpha)
    target = sweep.write_outputs(rows, cfg)
    csv_lines = (target / "rows.csv").read_text().splitlines()
    assert csv_lines[0] == ",".join(sweep.CSV_COLUMNS) and len(csv_lines) == 3
    assert sweep.load_rows(target / "rows.json") == rows
    meta = json.loads((target / "meta.json").read_text())
    assert meta["run_id"] == cfg.run_id() and "numpy" in meta["versions"]


def test_single_row_csv(tmp_path):
    row = sweep.run_case(RateParams(), (50, 60), SMALL)
    p = sweep.export([row], tmp_path / "one.csv")
    assert len(p.read_text().splitlines()) == 2


def test_deterministic_csv(tmp_path):
    a = sweep.run_table(small_config(tmp_path / "a"))
    b = sweep.run_table(small_config(tmp_path / "b", workers=2))
    pa = sweep.export(a, tmp_path / "a.csv").read_bytes()
    pb = sweep.export(b, tmp_path / "b.csv").read_bytes()
    assert pa == pb


def test_failure_isolated(tmp_path, monkeypatch):
    real = spectrum.transform_grid

    def flaky(env, grid, *a, **k):
        if env.params.r == 1.0:
            raise spectrum.NumericalError("boom")
        return real(env, grid, *a, **k)

    monkeypatch.setattr(spectrum, "transform_grid", flaky)
    rows = sweep.run_table(small_config(tmp_path))
    assert not rows[0].failed
    assert rows[1].failed and rows[1].error.startswith("transform:")
    assert math.isnan(rows[1].alpha) and "failed_transform" in rows[1].flags


def test_unwritable_outdir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        sweep.run_table(small_config(tmp_path, outdir=str(blocker / "sub")))


def test_export_empty(tmp_path):
    with pytest.raises(DomainError):
        sweep.export([], tmp_path / "x.csv")


def test_config_roundtrip(tmp_path):
    cfg = small_config(tmp_path)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = sweep.load_config(path)
    assert back.run_id() == cfg.run_id()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**cfg.to_dict(), "colour": "red"}))
    with pytest.raises(DomainError):
        sweep.load_config(bad)


def test_worker_cap(monkeypatch):
    monkeypatch.setenv(sweep.THREADS_ENV, "2")
    assert sweep.worker_cap(8) == 2
    monkeypatch.setenv(sweep.THREADS_ENV, "zero")
    with pytest.raises(DomainError):
        sweep.worker_cap(8)
    monkeypatch.delenv(sweep.THREADS_ENV)
    assert sweep.worker_cap(3) == 3


def test_peaks_selected_when_oscillating(monkeypatch):
    # eta < 1 with >= 3 peaks uses the peak line; eta = 1 never does
    w = spectrum.default_omega_grid(40, 90, n_points=32)
    import numpy as np
    f = np.exp(20 - w**0.3) * (1 + 0.1 * np.cos(w))
    fake = spectrum.Spectrum(w, f, 0 * f, f)
    monkeypatch.setattr(spectrum, "transform_grid", lambda *a, **k: fake)
    settings = dataclasses.replace(SMALL, points=32)
    assert sweep.run_case(RateParams(eta=0.0), (40, 90), settings).method == "peaks"
    assert sweep.run_case(RateParams(eta=1.0), (40, 90), settings).method == "direct"
