"""Run a bench spec and print a per-method summary of the resulting CSV.

    python3 scripts/run_bench.py scripts/specs/room_corner.toml results/room_corner.csv
"""
import argparse
from pathlib import Path

import numpy as np

from sgdicp.harness import load_spec, run_experiment


def summarize(records):
    names = list(dict.fromkeys(r.method for r in records))
    print(f"{'method':<14}{'conv':>6}{'med trans':>12}{'med rot':>12}{'med iters':>11}{'med pts':>11}{'med s':>8}")
    for name in names:
        g = [r for r in records if r.method == name]
        med = lambda key: float(np.median([getattr(r, key) for r in g]))  # noqa: E731
        print(f"{name:<14}{sum(r.converged for r in g):>3}/{len(g):<2}{med('trans_err'):>12.2e}"
              f"{med('rot_err'):>12.2e}{med('iterations'):>11.0f}{med('points_processed'):>11.0f}"
              f"{med('wall_time_s'):>8.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec")
    ap.add_argument("out")
    ap.add_argument("--no-timing", action="store_true")
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    records = run_experiment(load_spec(args.spec), out=args.out, timing=not args.no_timing)
    summarize(records)


if __name__ == "__main__":
    main()
