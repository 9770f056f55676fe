import json
import math

import numpy as np
import pytest

from ringrc import sweep as sweep_mod
from ringrc.config import RunConfig, SweepGrid
from ringrc.errors import Diverged
from ringrc.sweep import (
    CSV_COLUMNS,
    csv_body,
    evaluate_point,
    evaluate_seed,
    heatmap,
    read_sweep_csv,
    records_to_csv,
    run_sweep,
    with_point,
    write_sweep,
)

POINT = (-50.0, -5.0, 10e-9, 50e-9)


def test_with_point_units(small_experiment):
    cfg = with_point(small_experiment, -50.0, 0.0)
    assert cfg.tdrc.p_in_avg == 1e-3
    assert cfg.mrr.delta_omega == pytest.approx(2 * math.pi * -50e9, rel=1e-15)
    assert with_point(small_experiment, 0.0, -5.0).tdrc.p_in_avg == pytest.approx(3.16e-4, rel=1e-3)


def test_evaluate_seed_is_sane(small_experiment):
    res = evaluate_seed(with_point(small_experiment, -50.0, -5.0), 0, keep=True)
    assert 0 < res.train_nmse < 1 and 0 < res.test_nmse < 1.5
    assert res.model.weights.shape == (51,)
    assert res.states.shape == (400, 50)
    assert res.modulation_index <= 0.5 / 16.5 + 1e-12


def test_point_deterministic(small_experiment):
    a = evaluate_point(POINT, small_experiment)
    b = evaluate_point(POINT, small_experiment)
    assert a.test_nmse == b.test_nmse and a.lambdas == b.lambdas


def test_record_statistics(small_experiment):
    rec = evaluate_point(POINT, small_experiment)
    assert rec.seed_count == 2 and not rec.failed
    assert rec.nmse_mean == pytest.approx(np.mean(rec.test_nmse))
    assert rec.nmse_std == pytest.approx(np.std(rec.test_nmse))


def test_one_by_one_grid(small_experiment):
    grid = SweepGrid(detuning_ghz=(-50.0,), pin_dbm=(-5.0,))
    (rec,) = run_sweep(grid, small_experiment)
    ref = evaluate_point(POINT, small_experiment)
    assert rec.test_nmse == ref.test_nmse and rec.train_nmse == ref.train_nmse


def test_workers_do_not_change_records(small_experiment):
    grid = SweepGrid(detuning_ghz=(-100.0, 0.0, 100.0), pin_dbm=(-10.0, 0.0, 10.0))
    serial = run_sweep(grid, small_experiment, workers=1)
    parallel = run_sweep(grid, small_experiment, workers=8)
    assert [r.test_nmse for r in serial] == [r.test_nmse for r in parallel]
    assert csv_body(records_to_csv(serial, "h")) == csv_body(records_to_csv(parallel, "h"))


def test_failed_seed_is_recorded(small_experiment, monkeypatch):
    real = sweep_mod.evaluate_seed

    def flaky(cfg, seed, keep=False):
        if seed == 1:
            raise Diverged("boom")
        return real(cfg, seed, keep)

    monkeypatch.setattr(sweep_mod, "evaluate_seed", flaky)
    rec = evaluate_point(POINT, small_experiment)
    assert rec.failed_seeds == [1] and rec.seed_count == 1 and not rec.failed
    assert math.isnan(rec.test_nmse[1]) and rec.nmse_mean == rec.test_nmse[0]
    assert "Diverged" in rec.failures["1"]


def test_all_seeds_failing_marks_point(small_experiment, monkeypatch):
    def broken(cfg, seed, keep=False):
        raise Diverged("boom")

    monkeypatch.setattr(sweep_mod, "evaluate_seed", broken)
    rec = evaluate_point(POINT, small_experiment)
    assert rec.failed and math.isnan(rec.nmse_mean)
    text = records_to_csv([rec])
    assert text.splitlines()[1].split(",")[5] == "nan"


def test_csv_and_manifest(tmp_path, small_experiment):
    grid = SweepGrid(detuning_ghz=(-50.0, 50.0), pin_dbm=(-5.0,))
    run = RunConfig(experiment=small_experiment, sweep=grid)
    records = run_sweep(grid, small_experiment)
    path = write_sweep(run, records, tmp_path, "start", timing=False)
    text = path.read_text()
    assert text.startswith(f"# config_sha256={run.config_hash()}\n")
    rows = read_sweep_csv(path)
    assert list(rows[0]) == CSV_COLUMNS and len(rows) == 2
    assert rows[0]["nmse_seed_2"] == "nan"
    manifest = json.loads((tmp_path / "sweep_manifest.json").read_text())
    assert manifest["config_sha256"] == run.config_hash()
    assert manifest["seeds"] == [0, 1] and len(manifest["wall_s"]) == 2
    timed = records_to_csv(records, timing=True)
    assert timed.splitlines()[0].endswith(",wall_s")


def test_heatmap_layout(small_experiment):
    grid = SweepGrid(detuning_ghz=(-50.0, 50.0), pin_dbm=(-5.0, 0.0, 5.0))
    records = run_sweep(grid, small_experiment)
    hm = heatmap(records, grid, 10e-9, 50e-9)
    assert hm.shape == (3, 2)
    assert hm[2, 1] == records[-1].nmse_mean
