"""
Per-seed NMSE at one operating point while varying a single knob.

    python scripts/operating_point.py --knob phase --values 0 1.57 3.14 4.71
    python scripts/operating_point.py --knob delay --values 0.3e-9 0.5e-9 0.54e-9
    python scripts/operating_point.py --knob gain --values 0 0.5 1

Useful for checking how sensitive the low-error regime is to feedback
settings the defaults leave fixed.
"""

import argparse
import dataclasses

import numpy as np

from ringrc.config import PRESETS, ExperimentConfig
from ringrc.sweep import evaluate_point

KNOBS = ("phase", "delay", "gain", "bias_beta", "mask_seed")


def configure(cfg: ExperimentConfig, knob: str, value: float) -> ExperimentConfig:
    if knob in ("phase", "delay", "gain"):
        fb = dataclasses.replace(cfg.feedback, **{knob: value})
        return dataclasses.replace(cfg, feedback=fb)
    value = int(value) if knob == "mask_seed" else value
    return dataclasses.replace(cfg, tdrc=dataclasses.replace(cfg.tdrc, **{knob: value}))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--knob", choices=KNOBS, required=True)
    ap.add_argument("--values", type=float, nargs="+", required=True)
    ap.add_argument("--detuning-ghz", type=float, default=-50.0)
    ap.add_argument("--pin-dbm", type=float, default=-5.0)
    ap.add_argument("--preset", choices=sorted(PRESETS), default="carrier")
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    fc, th = PRESETS[args.preset]
    for v in args.values:
        cfg = configure(ExperimentConfig(), args.knob, v)
        rec = evaluate_point((args.detuning_ghz, args.pin_dbm, fc, th), cfg, seeds=range(args.seeds))
        per_seed = " ".join(f"{x:.3f}" for x in rec.test_nmse)
        print(f"{args.knob}={v:<10g} mean {rec.nmse_mean:.4f} sem {rec.nmse_sem:.4f} | {per_seed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
