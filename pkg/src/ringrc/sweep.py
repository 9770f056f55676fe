"""
Grid sweeps over detuning, pump power and the two nonlinearity lifetimes.

A grid point is evaluated over the configured task seeds; each seed runs the
whole pipeline (NARMA-10 draw, reservoir, ridge readout) on its own. Points
are independent, so they are farmed out to worker processes and merged back
by grid index, which keeps the output identical for any worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

import ringrc
from ringrc.config import ExperimentConfig, RunConfig, SweepGrid
from ringrc.errors import Diverged, NonFinite, SingularSystem
from ringrc.readout import ReadoutModel, add_bias, lambda_search, nmse, predict, ridge_train
from ringrc.tasks import narma10, split
from ringrc.tdrc import StateMatrix, dbm_to_watt, generate_mask, run_reservoir

log = logging.getLogger(__name__)

N_SEED_COLUMNS = 10


@dataclass
class SeedResult:
    seed: int
    train_nmse: float
    test_nmse: float
    lam: float
    modulation_index: float
    model: Optional[ReadoutModel] = None
    states: Optional[StateMatrix] = None
    feature_mean: Optional[np.ndarray] = None
    feature_scale: Optional[np.ndarray] = None


def with_point(cfg: ExperimentConfig, detuning_ghz: float, pin_dbm: float, tau_fc=None, tau_th=None) -> ExperimentConfig:
    """Copy of ``cfg`` moved to one grid point."""
    mrr = cfg.mrr.replace(
        delta_omega=2 * math.pi * detuning_ghz * 1e9,
        tau_fc=cfg.mrr.tau_fc if tau_fc is None else tau_fc,
        tau_th=cfg.mrr.tau_th if tau_th is None else tau_th,
    )
    tdrc = dataclasses.replace(cfg.tdrc, p_in_avg=dbm_to_watt(pin_dbm))
    return dataclasses.replace(cfg, mrr=mrr, tdrc=tdrc)


def _standardize(X_train: np.ndarray, *others: np.ndarray):
    mean = X_train.mean(axis=0)
    scale = X_train.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale, [(X - mean) / scale for X in (X_train, *others)]


def evaluate_seed(cfg: ExperimentConfig, seed: int, keep: bool = False) -> SeedResult:
    """
    Full pipeline for one task seed: NARMA-10 draw, reservoir run, readout.

    Raises Diverged, NonFinite or SingularSystem; the caller decides whether
    that aborts anything.
    """
    task = cfg.task
    n = task.n_symbols
    data = narma10(seed, n + task.target_shift)
    mask = generate_mask(cfg.tdrc.mask_seed, cfg.tdrc.n_nodes)
    sm = run_reservoir(data.u[:n], cfg.mrr, cfg.tdrc, cfg.feedback, cfg.integrator, task.warmup, mask=mask)

    parts = split(n, task.warmup, task.train, task.test)
    target = data.y[task.target_shift : n + task.target_shift]
    rows = lambda s: slice(s.start - task.warmup, s.stop - task.warmup)  # noqa: E731
    X_train, X_test = sm.states[rows(parts.train)], sm.states[rows(parts.test)]
    y_train, y_test = target[parts.train], target[parts.test]

    mean = scale = None
    if cfg.readout.standardize:
        mean, scale, (X_train, X_test) = _standardize(X_train, X_test)
    X_train, X_test = add_bias(X_train), add_bias(X_test)

    ro = cfg.readout
    if ro.search:
        n_fit = len(y_train) - max(2, int(round(ro.val_fraction * len(y_train))))
        lam, _ = lambda_search(X_train[:n_fit], y_train[:n_fit], X_train[n_fit:], y_train[n_fit:], ro.grid)
    else:
        lam = ro.lam
    model = ridge_train(X_train, y_train, lam)
    return SeedResult(
        seed=seed,
        train_nmse=nmse(predict(X_train, model), y_train),
        test_nmse=nmse(predict(X_test, model), y_test),
        lam=lam,
        modulation_index=sm.modulation_index,
        model=model if keep else None,
        states=sm if keep else None,
        feature_mean=mean if keep else None,
        feature_scale=scale if keep else None,
    )


@dataclass
class SweepRecord:
    detuning_ghz: float
    pin_dbm: float
    tau_fc: float
    tau_th: float
    seeds: list
    train_nmse: list  # NaN for failed seeds
    test_nmse: list
    lambdas: list
    failed_seeds: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    mod_index: float = float("nan")
    wall_s: float = 0.0

    @property
    def ok_test(self) -> np.ndarray:
        values = np.asarray(self.test_nmse, dtype=float)
        return values[np.isfinite(values)]

    @property
    def seed_count(self) -> int:
        return len(self.ok_test)

    @property
    def nmse_mean(self) -> float:
        ok = self.ok_test
        return float(np.mean(ok)) if len(ok) else float("nan")

    @property
    def nmse_std(self) -> float:
        ok = self.ok_test
        return float(np.std(ok)) if len(ok) else float("nan")

    @property
    def nmse_sem(self) -> float:
        ok = self.ok_test
        return float(np.std(ok, ddof=1) / math.sqrt(len(ok))) if len(ok) > 1 else float("nan")

    @property
    def failed(self) -> bool:
        return self.seed_count == 0


def evaluate_point(coords: Sequence[float], cfg: ExperimentConfig, seeds: Optional[Sequence[int]] = None) -> SweepRecord:
    """
    Evaluate one grid point ``(detuning_ghz, pin_dbm, tau_fc, tau_th)``.

    Seeds that diverge or go non-finite are listed in the record and left
    out of the mean instead of aborting.
    """
    detuning_ghz, pin_dbm, tau_fc, tau_th = coords
    seeds = list(cfg.task.seeds if seeds is None else seeds)
    point_cfg = with_point(cfg, detuning_ghz, pin_dbm, tau_fc, tau_th)
    start = time.perf_counter()
    rec = SweepRecord(detuning_ghz, pin_dbm, tau_fc, tau_th, seeds, [], [], [])
    indices = []
    for seed in seeds:
        try:
            res = evaluate_seed(point_cfg, seed)
        except (Diverged, NonFinite, SingularSystem) as exc:
            rec.failed_seeds.append(seed)
            rec.failures[str(seed)] = f"{type(exc).__name__}: {exc}"
            rec.train_nmse.append(float("nan"))
            rec.test_nmse.append(float("nan"))
            rec.lambdas.append(float("nan"))
            continue
        rec.train_nmse.append(res.train_nmse)
        rec.test_nmse.append(res.test_nmse)
        rec.lambdas.append(res.lam)
        indices.append(res.modulation_index)
    rec.mod_index = max(indices) if indices else float("nan")
    rec.wall_s = time.perf_counter() - start
    return rec


def _evaluate_indexed(args):
    index, coords, cfg = args
    return index, evaluate_point(coords, cfg)


def run_sweep(
    grid: SweepGrid,
    cfg: ExperimentConfig,
    workers: int = 1,
    progress: Optional[Callable[[int, int, SweepRecord], None]] = None,
) -> list[SweepRecord]:
    """Evaluate every grid point; records come back in row-major grid order."""
    points = grid.points()
    jobs = [(i, p, cfg) for i, p in enumerate(points)]
    records: list[Optional[SweepRecord]] = [None] * len(points)
    done = 0
    if workers <= 1:
        results = map(_evaluate_indexed, jobs)
        for index, rec in results:
            records[index] = rec
            done += 1
            if progress:
                progress(done, len(points), rec)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, rec in pool.map(_evaluate_indexed, jobs):
                records[index] = rec
                done += 1
                if progress:
                    progress(done, len(points), rec)
    return records


CSV_COLUMNS = (
    ["detuning_ghz", "pin_dbm", "tau_fc_s", "tau_th_s", "seed_count", "nmse_mean", "nmse_std"]
    + [f"nmse_seed_{i}" for i in range(N_SEED_COLUMNS)]
    + ["failed_seeds", "mod_index"]
)


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else "nan"


def records_to_csv(records: Sequence[SweepRecord], config_hash: str = "", timing: bool = False) -> str:
    """
    Render records as CSV text.

    The body is a pure function of the records' numerical content. Wall-clock
    time only appears when ``timing`` is set, since it would otherwise break
    byte-for-byte reproducibility across worker counts.
    """
    buf = io.StringIO()
    if config_hash:
        buf.write(f"# config_sha256={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + (["wall_s"] if timing else []))
    for r in records:
        seeds = list(r.test_nmse[:N_SEED_COLUMNS]) + [float("nan")] * (N_SEED_COLUMNS - len(r.test_nmse))
        row = [
            _fmt(r.detuning_ghz),
            _fmt(r.pin_dbm),
            _fmt(r.tau_fc),
            _fmt(r.tau_th),
            str(r.seed_count),
            _fmt(r.nmse_mean),
            _fmt(r.nmse_std),
            *(_fmt(v) for v in seeds),
            ";".join(str(s) for s in r.failed_seeds),
            _fmt(r.mod_index),
        ]
        if timing:
            row.append(f"{r.wall_s:.3f}")
        w.writerow(row)
    return buf.getvalue()


def csv_body(text: str) -> str:
    """CSV text without leading comment lines."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def read_sweep_csv(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def build_manifest(run: RunConfig, records: Sequence[SweepRecord], started: str, finished: str) -> dict:
    return {
        "config_sha256": run.config_hash(),
        "config": run.to_dict(),
        "seeds": list(run.experiment.task.seeds),
        "code_version": ringrc.__version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
        "workers": run.workers,
        "started_utc": started,
        "finished_utc": finished,
        "n_points": len(records),
        "failed_points": [i for i, r in enumerate(records) if r.failed],
        "partial_seed_failures": {str(i): r.failures for i, r in enumerate(records) if r.failures},
        "wall_s": [round(r.wall_s, 4) for r in records],
        "nmse_sem": [r.nmse_sem for r in records],
    }


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_sweep(run: RunConfig, records: Sequence[SweepRecord], out_dir: Path, started: str, timing: bool = False):
    out_dir.mkdir(parents=True, exist_ok=True)
    h = run.config_hash()
    csv_path = out_dir / "sweep.csv"
    csv_path.write_text(records_to_csv(records, h, timing=timing))
    manifest = build_manifest(run, records, started, utc_now())
    (out_dir / "sweep_manifest.json").write_text(dump_json(manifest))
    return csv_path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(obj) -> str:
    """Strict JSON (NaN becomes null), stable key order."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def heatmap(records: Sequence[SweepRecord], grid: SweepGrid, tau_fc: float, tau_th: float) -> np.ndarray:
    """Mean test NMSE as a (power × detuning) array for one lifetime pair."""
    out = np.full((len(grid.pin_dbm), len(grid.detuning_ghz)), np.nan)
    pi = {p: i for i, p in enumerate(grid.pin_dbm)}
    di = {d: j for j, d in enumerate(grid.detuning_ghz)}
    for r in records:
        if r.tau_fc == tau_fc and r.tau_th == tau_th:
            out[pi[r.pin_dbm], di[r.detuning_ghz]] = r.nmse_mean
    return out
