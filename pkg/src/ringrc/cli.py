"""Command-line entry point: ``ringrc simulate | sweep | validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ringrc.config import PRESETS, RunConfig, SweepGrid, load_run_config
from ringrc.errors import ConfigError, RingRCError
from ringrc.integrator import IntegratorConfig, integrate
from ringrc.physics import MrrState
from ringrc.sweep import (
    dump_json,
    evaluate_seed,
    records_to_csv,
    run_sweep,
    utc_now,
    with_point,
    write_sweep,
)
from ringrc.tasks import narma10
from ringrc.tdrc import encode, generate_mask

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4

log = logging.getLogger("ringrc")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="run config file (TOML)")
    p.add_argument("--device", type=Path, help="device constants file, overrides [run].device")
    p.add_argument("--dt", type=float, help="integration step [s]")
    p.add_argument("--phase", type=float, help="feedback phase [rad]")
    p.add_argument("--preset", choices=sorted(PRESETS), help="(tau_fc, tau_th) preset")
    p.add_argument("--tau-fc", type=float, nargs="+", help="carrier lifetime(s) [s]")
    p.add_argument("--tau-th", type=float, nargs="+", help="thermal decay time(s) [s]")
    p.add_argument("--warmup", type=int)
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringrc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one pipeline at a single operating point")
    _common(sim)
    sim.add_argument("--detuning-ghz", type=float, default=-50.0)
    sim.add_argument("--pin-dbm", type=float, default=-5.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--trace-symbols", type=int, default=0, help="also dump the raw trace of the first N symbols")

    sw = sub.add_parser("sweep", help="NMSE over a detuning x power grid")
    _common(sw)
    sw.add_argument("--detuning", type=float, nargs=3, metavar=("MIN_GHZ", "MAX_GHZ", "N"))
    sw.add_argument("--pin", type=float, nargs=3, metavar=("MIN_DBM", "MAX_DBM", "N"))
    sw.add_argument("--seeds", type=int, help="use seeds 0..N-1")
    sw.add_argument("--workers", type=int, help="worker processes (default: RING_RC_THREADS or 1)")
    sw.add_argument("--timing", action="store_true", help="add a wall_s column to the CSV")

    val = sub.add_parser("validate", help="run the analytic oracle battery")
    _common(val)
    return parser


def _overrides(args) -> dict:
    o: dict = {s: {} for s in ("run", "integrator", "feedback", "task", "sweep")}
    if args.device is not None:
        o["run"]["device"] = str(args.device.resolve())
    if args.out is not None:
        o["run"]["output_dir"] = str(args.out)
    if args.command != "validate":
        # validate takes dt directly: its oracles do not use the chip grid
        o["integrator"]["dt"] = args.dt
    o["feedback"]["phase"] = args.phase
    for key in ("warmup", "train", "test"):
        o["task"][key] = getattr(args, key)
    if args.preset:
        fc, th = PRESETS[args.preset]
        o["sweep"]["tau_fc"] = [fc]
        o["sweep"]["tau_th"] = [th]
    if args.tau_fc:
        o["sweep"]["tau_fc"] = sorted(args.tau_fc)
    if args.tau_th:
        o["sweep"]["tau_th"] = sorted(args.tau_th)
    if getattr(args, "detuning", None):
        lo, hi, n = args.detuning
        o["sweep"]["detuning_ghz"] = list(SweepGrid.linspace(lo, hi, int(n)))
    if getattr(args, "pin", None):
        lo, hi, n = args.pin
        o["sweep"]["pin_dbm"] = list(SweepGrid.linspace(lo, hi, int(n)))
    if getattr(args, "seeds", None):
        o["task"]["seeds"] = list(range(args.seeds))
    if getattr(args, "workers", None):
        o["run"]["workers"] = args.workers
    return o


def _lifetimes(run: RunConfig):
    """The single (tau_fc, tau_th) pair used by simulate and validate."""
    return run.sweep.tau_fc[0], run.sweep.tau_th[0]


def cmd_simulate(args, run: RunConfig) -> int:
    tau_fc, tau_th = _lifetimes(run)
    cfg = with_point(run.experiment, args.detuning_ghz, args.pin_dbm, tau_fc, tau_th)
    res = evaluate_seed(cfg, args.seed, keep=True)
    out = run.output_dir
    out.mkdir(parents=True, exist_ok=True)
    h = run.config_hash()
    res.states.to_csv(out / "states.csv")
    res.model.to_json(out / "model.json", config_sha256=h)
    narma10(args.seed, cfg.task.n_symbols + cfg.task.target_shift).to_csv(out / "dataset.csv")
    metrics = {
        "config_sha256": h,
        "seed": args.seed,
        "detuning_ghz": args.detuning_ghz,
        "pin_dbm": args.pin_dbm,
        "tau_fc_s": tau_fc,
        "tau_th_s": tau_th,
        "train_nmse": res.train_nmse,
        "test_nmse": res.test_nmse,
        "lambda": res.lam,
        "modulation_index": res.modulation_index,
        "feature_mean": res.feature_mean,
        "feature_scale": res.feature_scale,
    }
    (out / "metrics.json").write_text(dump_json(metrics))
    if args.trace_symbols > 0:
        n = min(args.trace_symbols, cfg.task.n_symbols)
        u = narma10(args.seed, cfg.task.n_symbols).u[:n]
        wf = encode(u, generate_mask(cfg.tdrc.mask_seed, cfg.tdrc.n_nodes), cfg.tdrc, cfg.integrator.dt)
        tr = integrate(MrrState(), wf, cfg.mrr, IntegratorConfig(cfg.integrator.dt, 1), cfg.feedback)
        tr.to_csv(out / "trace.csv")
    print(f"test NMSE {res.test_nmse:.5f} (train {res.train_nmse:.5f}, lambda {res.lam:g}); wrote {out}/")
    return EXIT_OK


def cmd_sweep(args, run: RunConfig) -> int:
    started = utc_now()
    total = len(run.sweep.points())

    def progress(done, n, rec):
        print(
            f"[{done}/{n}] det={rec.detuning_ghz:+.1f} GHz pin={rec.pin_dbm:+.1f} dBm "
            f"nmse={rec.nmse_mean:.4f} ({rec.wall_s:.1f} s)",
            file=sys.stderr,
            flush=True,
        )

    print(f"sweeping {total} points with {run.workers} worker(s)", file=sys.stderr)
    records = run_sweep(run.sweep, run.experiment, workers=run.workers, progress=progress)
    path = write_sweep(run, records, run.output_dir, started, timing=args.timing)
    n_failed = sum(r.failed for r in records)
    print(f"wrote {path} ({len(records)} records, {n_failed} failed)")
    return EXIT_PARTIAL if n_failed else EXIT_OK


def cmd_validate(args, run: RunConfig) -> int:
    from ringrc.validate import run_all

    tau_fc, tau_th = _lifetimes(run)
    params = run.experiment.mrr.replace(tau_fc=tau_fc, tau_th=tau_th)
    dt = run.experiment.integrator.dt if args.dt is None else IntegratorConfig(dt=args.dt).dt
    results = run_all(params, dt)
    for r in results:
        print(r.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} oracles passed")
    return EXIT_OK if n_fail == 0 else EXIT_NUMERIC


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        run = load_run_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RingRCError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
