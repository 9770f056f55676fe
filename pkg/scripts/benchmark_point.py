"""Time one full grid point (10 seeds, 4100 symbols, dt = 1 ps) and extrapolate to 41x41."""

import os
import time

from ringrc.config import PRESETS, ExperimentConfig
from ringrc.sweep import evaluate_point

if __name__ == "__main__":
    fc, th = PRESETS["baseline"]
    cfg = ExperimentConfig()
    evaluate_point((-50.0, -5.0, fc, th), cfg, seeds=[0])  # compile and warm caches
    start = time.perf_counter()
    rec = evaluate_point((-50.0, -5.0, fc, th), cfg)
    wall = time.perf_counter() - start
    cores = os.cpu_count() or 1
    print(f"one point: {wall:.2f} s, mean test NMSE {rec.nmse_mean:.4f}")
    print(f"41x41 grid: {wall * 1681 / 3600:.2f} h serial, about {wall * 1681 / 3600 / cores:.2f} h with {cores} workers")
