"""Single-plane registration: the normal direction is recovered, the in-plane shift is not.

The reference is an independent sample of the same square, so nearest
neighbours carry almost no in-plane information and only the square's
edges pull the estimate. Compare with the room corner, where three
orthogonal planes pin every direction.
"""
import argparse

import numpy as np

from sgdicp.harness import BUILTIN_METHODS, ExperimentSpec, error_transform, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--points", type=int, default=10000)
    ap.add_argument("--max-t", type=float, default=0.1)
    args = ap.parse_args()

    for primitive in ("plane", "room-corner"):
        spec = ExperimentSpec(primitive=primitive, points=args.points, max_t=args.max_t, max_r=0.0,
                              trials=args.trials, resample_reference=True, translation_axes="xy",
                              methods=[BUILTIN_METHODS["sgd-fixed"]])
        print(f"{primitive}:")
        for r in run_experiment(spec):
            _, t = error_transform(r.theta_est, r.theta_true)
            shift = np.hypot(r.theta_true.x, r.theta_true.y)
            print(f"  trial {r.trial}  shift {shift:.3f}  in-plane err {np.hypot(t[0], t[1]):.2e}  "
                  f"normal err {abs(t[2]):.1e}  iters {r.iterations:5d}  converged {r.converged}")


if __name__ == "__main__":
    main()
