"""Mean adoption on random regular graphs against the tree recursion.

Prints one comparison table per seed fraction, e.g.

    python3 scripts/theory_vs_sim.py --delta 3 --n 10000 --alphas 0.1 0.3 0.5
"""

import argparse

from netcontagion.harness import compare
from netcontagion.payoff import PayoffParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=int, default=3)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--T", type=int, default=5)
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = PayoffParams.majority()
    for alpha in args.alphas:
        rep = compare(args.delta, args.n, params, alpha, args.T, args.reps, args.seed)
        print(f"alpha = {alpha}  (max |z| = {rep.max_abs_z:.2f})")
        print(f"{'t':>3} {'h_tilde':>10} {'mean':>10} {'stderr':>10} {'z':>7}")
        for r in rep.rows:
            print(f"{r.t:>3} {r.theory:>10.5f} {r.mean:>10.5f} {r.stderr:>10.2e} {r.z:>7.2f}")
        print()


if __name__ == "__main__":
    main()
