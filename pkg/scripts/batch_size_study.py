"""Batch-size sweep on one fixed pair, summarised per schedule and batch size.

    python3 scripts/batch_size_study.py --out results/batch_sizes.csv
"""
import argparse
from pathlib import Path

import numpy as np

from sgdicp.harness import ExperimentSpec, MethodSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 15, 50, 160, 300])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--points", type=int, default=10000)
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--pair-seed", type=int, default=123)
    ap.add_argument("--out", default="results/batch_sizes.csv")
    args = ap.parse_args()

    methods = [MethodSpec(f"m{m}-{s}", "sgd", {"batch_size": m, "schedule": s})
               for s in ("fixed", "adam") for m in args.sizes]
    spec = ExperimentSpec(points=args.points, noise=args.noise, trials=args.trials,
                          perturbation_seed=args.pair_seed, methods=methods)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    recs = run_experiment(spec, out=args.out)

    print(f"{'method':<14}{'conv':>6}{'med trans':>12}{'max trans':>12}{'med rot':>12}{'med iters':>11}")
    for m in methods:
        g = [r for r in recs if r.method == m.name]
        t = [r.trans_err for r in g]
        print(f"{m.name:<14}{sum(r.converged for r in g):>3}/{len(g):<2}{np.median(t):>12.2e}{max(t):>12.2e}"
              f"{np.median([r.rot_err for r in g]):>12.2e}{np.median([r.iterations for r in g]):>11.0f}")


if __name__ == "__main__":
    main()
