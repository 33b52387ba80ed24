#!/usr/bin/env python3
"""Optimal cavity-protocol negativity as a function of beta*E for both
initial product states (both-ground and both-excited).

Writes CSV: betaE, neg_ground, neg_excited
"""

import argparse
import sys

import numpy as np

from thermalent import JCConfig, jc_protocol
from thermalent.dynamics import suggest_n_max


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betaE-min", type=float, default=0.2)
    ap.add_argument("--betaE-max", type=float, default=6.0)
    ap.add_argument("--points", type=int, default=30)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    grid = np.linspace(args.betaE_min, args.betaE_max, args.points)
    fh = open(args.out, "w") if args.out else sys.stdout
    print("betaE,neg_ground,neg_excited", file=fh)
    for be in grid:
        nmax = suggest_n_max(float(be))
        n00 = jc_protocol(JCConfig("00", float(be), n_max=nmax)).negativity
        n11 = jc_protocol(JCConfig("11", float(be), n_max=nmax)).negativity
        print(f"{be:.6g},{n00:.6g},{n11:.6g}", file=fh)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
