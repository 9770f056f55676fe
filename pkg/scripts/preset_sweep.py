"""
Detuning x power NMSE maps for each lifetime preset.

    python scripts/preset_sweep.py --points 9 --out out/presets
    python scripts/preset_sweep.py --points 41 --presets carrier --workers 8

Writes one sweep.csv + manifest per preset and prints a coarse text map.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from ringrc.config import PRESETS, RunConfig, SweepGrid, load_run_config
from ringrc.sweep import heatmap, run_sweep, utc_now, write_sweep

SHADES = " .:-=+*#%@"


def text_map(hm: np.ndarray, grid: SweepGrid) -> str:
    """Rows are powers (high at top); '!' marks NMSE > 1."""
    lines = []
    for i in range(hm.shape[0] - 1, -1, -1):
        cells = []
        for v in hm[i]:
            if not np.isfinite(v):
                cells.append("?")
            elif v > 1.0:
                cells.append("!")
            else:
                cells.append(SHADES[min(len(SHADES) - 1, int(v * len(SHADES)))])
        lines.append(f"{grid.pin_dbm[i]:+6.1f} dBm |{''.join(cells)}|")
    lines.append(f"{'':10} {grid.detuning_ghz[0]:+.0f} ... {grid.detuning_ghz[-1]:+.0f} GHz")
    return "\n".join(lines)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--presets", nargs="+", default=["baseline", "thermal", "carrier", "fast_carrier"], choices=sorted(PRESETS))
    ap.add_argument("--points", type=int, default=9, help="points per axis")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/presets"))
    args = ap.parse_args(argv)

    base = load_run_config(args.config, {"task": {"seeds": list(range(args.seeds))}})
    for name in args.presets:
        fc, th = PRESETS[name]
        grid = SweepGrid(
            detuning_ghz=SweepGrid.linspace(-200, 200, args.points),
            pin_dbm=SweepGrid.linspace(-20, 20, args.points),
            tau_fc=(fc,),
            tau_th=(th,),
        )
        run = RunConfig(experiment=base.experiment, sweep=grid, device_file=base.device_file, workers=args.workers)
        started = utc_now()
        records = run_sweep(grid, run.experiment, workers=args.workers)
        write_sweep(run, records, args.out / name, started)
        hm = heatmap(records, grid, fc, th)
        i, j = np.unravel_index(np.nanargmax(hm), hm.shape)
        k, m = np.unravel_index(np.nanargmin(hm), hm.shape)
        print(f"\n{name}: tau_fc={fc:g} s, tau_th={th:g} s")
        print(text_map(hm, grid))
        print(f"best {hm[k, m]:.4f} at {grid.detuning_ghz[m]:+.0f} GHz / {grid.pin_dbm[k]:+.0f} dBm; "
              f"worst {hm[i, j]:.3f} at {grid.detuning_ghz[j]:+.0f} GHz / {grid.pin_dbm[i]:+.0f} dBm")
    return 0


if __name__ == "__main__":
    sys.exit(main())
