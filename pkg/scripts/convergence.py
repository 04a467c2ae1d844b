#!/usr/bin/env python3
"""Self-convergence table for both solvers: successive differences of the final
profile under h -> h/2 and the implied orders."""
import argparse
import sys

from tail_lab.evolve import InitialData, self_convergence
from tail_lab.spectrum import ModeSpec

CASES = [
    ("wave n=3 f=1 j=0", ModeSpec.wave(3, 1.0, 0)),
    ("wave n=3 f=-0.1875 j=0", ModeSpec.wave(3, -0.1875, 0)),
    ("wave n=4 f=0.5 j=1", ModeSpec.wave(4, 0.5, 1)),
    ("dirac Z=0 kappa=1", ModeSpec.dirac(0.0, 1)),
    ("dirac Z=0 kappa=-1", ModeSpec.dirac(0.0, -1)),
    ("dirac Z=0.45 kappa=1", ModeSpec.dirac(0.45, 1)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--h0", type=float, default=0.04)
    args = ap.parse_args()
    data = InitialData()
    for name, spec in CASES:
        diffs, orders = self_convergence(spec, data, h0=args.h0, levels=args.levels)
        print(f"{name:<24} diffs " + " ".join(f"{d:.2e}" for d in diffs)
              + "  orders " + " ".join(f"{o:.2f}" for o in orders))
    return 0


if __name__ == "__main__":
    sys.exit(main())
