"""Limit adoption h_tilde(alpha) on the regular tree and the critical seed fraction.

    python3 scripts/phase_scan.py --delta 5 --theta 1 --out scan.csv
"""

import argparse
import sys

import numpy as np

from netcontagion.harness import csv_text
from netcontagion.theory import alpha_crit, fixed_point


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=int, default=5)
    ap.add_argument("--theta", type=float, default=1)
    ap.add_argument("--points", type=int, default=101)
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    crit = alpha_crit(args.delta, args.theta)
    note = "" if crit.supported else " (outside the range covered by the existence result)"
    print(f"alpha_crit = {crit.alpha:.8f}{note}", file=sys.stderr)

    rows = []
    for a in np.linspace(0, 1, args.points):
        rep = fixed_point(args.delta, args.theta, a)
        rows.append((a, rep.h_star, rep.h_tilde_limit, len(rep.solutions), rep.regime))
    text = csv_text(("alpha", "h_star", "h_tilde", "n_roots", "regime"), rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
