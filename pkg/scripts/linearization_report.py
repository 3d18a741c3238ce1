"""Sweep the fixed-load scaling and tabulate the affine power-flow error
against the Newton oracle.

Usage:
    python scripts/linearization_report.py --out lin_error.csv --max-scale 10
"""
import argparse
import csv
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from mgsched.model import load_case, bundled_case_path
from mgsched.powerflow import linearization_error_report
from mgsched.scheduler import default_inputs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", default=str(bundled_case_path()))
    ap.add_argument("--out", default="lin_error.csv")
    ap.add_argument("--hour", type=int, default=None,
                    help="1-based hour to scale (default: peak-load hour)")
    ap.add_argument("--max-scale", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=21)
    args = ap.parse_args()

    model = load_case(args.case)
    inputs = default_inputs(model)
    hour = None if args.hour is None else args.hour - 1
    scalings = np.linspace(0.0, args.max_scale, args.points)
    rows = linearization_error_report(model, inputs, scalings, hour=hour)

    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    print(f"{'scaling':>8} {'max_v_error':>12} {'max_drop':>9} {'iters':>6}")
    for r in rows:
        if not r["oracle_converged"]:
            print(f"{r['scaling']:8.2f}  oracle diverged after "
                  f"{r['oracle_iters']} iterations")
            continue
        print(f"{r['scaling']:8.2f} {r['max_v_error']:12.3e} "
              f"{r['max_drop']:9.4f} {r['oracle_iters']:6d}")
    print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
