"""Write the data behind all three trade-off figures as CSV.

    python scripts/reproduce_figures.py --out results/

Defaults to N=2520, K=Q=10 and r=5 for the budget sweep.
"""

import argparse
import os

from cdc_tradeoff.cli import main as cli


def run(out_dir, K, Q, N, r, steps):
    os.makedirs(out_dir, exist_ok=True)
    base = ["-K", str(K), "-Q", str(Q), "-N", str(N)]
    jobs = {
        "fig1.csv": ["curve", "fig1", *base],
        "fig2.csv": ["curve", "fig2", *base],
        "fig3.csv": ["curve", "fig3", *base, "-r", str(r), "--steps", str(steps)],
    }
    for name, argv in jobs.items():
        path = os.path.join(out_dir, name)
        code = cli(argv + ["--out", path])
        if code:
            raise SystemExit(code)
        print(f"wrote {path}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("-K", type=int, default=10)
    parser.add_argument("-Q", type=int, default=10)
    parser.add_argument("-N", type=int, default=2520)
    parser.add_argument("-r", type=int, default=5)
    parser.add_argument("--steps", type=int, default=60)
    args = parser.parse_args()
    run(args.out, args.K, args.Q, args.N, args.r, args.steps)
