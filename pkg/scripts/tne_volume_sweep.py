#!/usr/bin/env python3
"""Sweep the ambient inverse temperature and estimate how much of the
simplex stays thermally non-entanglable, alongside reference volumes.

Writes CSV: beta, v_tne, v_tne_err, v_e, v_e_err
"""

import argparse
import sys

import numpy as np

from thermalent import two_qubit_context, volume_of


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5")
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--gap", type=float, default=1.0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    betas = [float(b) for b in args.betas.split(",")]
    fh = open(args.out, "w") if args.out else sys.stdout
    print("beta,v_tne,v_tne_err,v_e,v_e_err", file=fh)
    for i, beta in enumerate(betas):
        ctx = two_qubit_context(beta, args.gap)
        tne = volume_of("TNE", ctx, None, args.samples, args.seed + 2 * i)
        ve = volume_of("E", ctx, None, args.samples, args.seed + 2 * i + 1)
        print(f"{beta:.6g},{tne.fraction:.6g},{tne.std_error:.3g},"
              f"{ve.fraction:.6g},{ve.std_error:.3g}", file=fh)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
