#!/usr/bin/env python3
"""Run the tail-decay acceptance matrix end to end and print one verdict line per case.

Each case is a RunConfig written to <out>/<name>/config.json, simulated and
verified exactly as `tail-lab verify --config ...` would.
"""
import argparse
import sys
import time
from pathlib import Path

from tail_lab.cli import run_simulation, run_verification
from tail_lab.config import RunConfig, TrajectoryConfig

FIXED = TrajectoryConfig("fixed_r", 2.0)
RAY = TrajectoryConfig("ray", 0.5)

CASES = {
    "wave_f1": dict(problem="wave", coupling=1.0, modes=[0], trajectories=[FIXED, RAY], tolerance=0.10),
    "wave_f2": dict(problem="wave", coupling=2.0, modes=[0, 1], t_max=120.0, trajectories=[FIXED],
                    tolerance=0.25, min_decades=0.9),
    "wave_fneg": dict(problem="wave", coupling=-0.1875, modes=[0], trajectories=[FIXED, RAY], tolerance=0.05),
    "dirac_z045": dict(problem="dirac", coupling=0.45, modes=[1], trajectories=[FIXED, RAY], tolerance=0.05),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/acceptance")
    ap.add_argument("--force", action="store_true", help="rerun completed cases")
    ap.add_argument("--only", nargs="*", choices=sorted(CASES))
    args = ap.parse_args()

    ok = True
    for name in args.only or CASES:
        cfg = RunConfig(output_dir=str(Path(args.out) / name), **CASES[name]).validate()
        t0 = time.perf_counter()
        run = run_simulation(cfg, force=args.force)
        rep = run_verification(run)
        secs = time.perf_counter() - t0
        print(f"== {name} ({secs:.1f} s) ==")
        print(rep.to_text())
        ok &= rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
