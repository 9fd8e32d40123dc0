"""Command-line entry point: ``sgdicp {align,bench,perturb,gradcheck}``.

Exit codes: 0 success, 1 registration failed, 2 input or parse error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

from .errors import (
    DegenerateGeometryError,
    DivergedError,
    EmptyCloudError,
    InvalidArgumentError,
    ParseError,
    RegistrationFailedError,
    SGDICPError,
    UnsupportedFormatError,
)
from .geometry import RigidParams
from .io import PoseRecord, read_cloud, read_pose, write_cloud, write_pose
from .registration import RegistrationConfig, sgd_icp

log = logging.getLogger("sgdicp")

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _write_trace(path, result):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "x", "y", "z", "roll", "pitch", "yaw",
                    "rms", "rejected", "points_processed", "elapsed_s"])
        for i, rec in enumerate(result.trace, start=1):
            w.writerow([i, *(repr(v) for v in rec.theta.as_array().tolist()),
                        repr(rec.rms), rec.rejected, rec.points_processed, repr(rec.elapsed)])


def cmd_align(args) -> int:
    source = read_cloud(args.source)
    reference = read_cloud(args.reference)
    theta0 = read_pose(args.theta0).theta if args.theta0 else RigidParams()
    config = RegistrationConfig(
        batch_size=args.batch_size, step_size=args.step_size, d_max=args.dmax,
        schedule=args.optimizer, max_iterations=args.max_iter, tol=args.tol,
        seed=args.seed, normalize=not args.no_normalize,
    )
    result = sgd_icp(source, reference, theta0, config)
    if not result.converged:
        log.warning("did not converge within %d iterations; writing last estimate", result.iterations)
    comment = (f"sgdicp align: {args.source} -> {args.reference}\n"
               f"converged={str(result.converged).lower()} iterations={result.iterations} "
               f"points_processed={result.points_processed}")
    write_pose(args.out, PoseRecord(result.theta, args.source, args.reference, comment))
    if args.trace:
        _write_trace(args.trace, result)
    print(" ".join(f"{v!r}" for v in result.theta.as_array().tolist()))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .harness import load_spec, run_experiment

    spec = load_spec(args.spec)
    records = run_experiment(spec, out=args.out, timing=not args.no_timing)
    n_ok = sum(r.converged for r in records)
    print(f"{len(records)} runs, {n_ok} converged -> {args.out}")
    return EXIT_OK


def cmd_perturb(args) -> int:
    from .harness import perturb

    cloud = read_cloud(args.input)
    moved, theta = perturb(cloud, args.max_t, args.max_r, seed=args.seed)
    write_cloud(args.out, moved)
    if args.pose_out:
        write_pose(args.pose_out, PoseRecord(theta, args.input, args.out,
                                             f"perturbation max_t={args.max_t!r} max_r={args.max_r!r} seed={args.seed}"))
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .gradcheck import run_gradcheck

    report = run_gradcheck(instances=args.instances, seed=args.seed, tol=args.tol)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: {report.instances} instances, max relative error {report.max_rel_err:.3e} "
          f"(tol {report.tol:g}, worst instance {report.worst_instance})")
    return EXIT_OK if report.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgdicp", description="Rigid point-cloud registration with SGD-ICP.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("align", help="register a source cloud onto a reference cloud")
    a.add_argument("--source", required=True)
    a.add_argument("--reference", required=True)
    a.add_argument("--theta0", help="initial pose file")
    a.add_argument("--out", default="pose.txt", help="pose file to write (default: pose.txt)")
    a.add_argument("--batch-size", type=int, default=160)
    a.add_argument("--step-size", type=float, default=None,
                   help="default 2.0 for the fixed schedule, 0.01 for adam")
    a.add_argument("--dmax", type=float, default=0.5)
    a.add_argument("--optimizer", choices=("fixed", "adam"), default="fixed")
    a.add_argument("--max-iter", type=int, default=None)
    a.add_argument("--tol", type=float, default=1e-5)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--no-normalize", action="store_true")
    a.add_argument("--trace", help="per-iteration trace CSV")
    a.set_defaults(func=cmd_align)

    b = sub.add_parser("bench", help="run a perturbation experiment from a TOML spec")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--no-timing", action="store_true",
                   help="write wall_time_s as nan so the CSV is byte-reproducible")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("perturb", help="apply a random rigid motion to a cloud")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--max-t", type=float, required=True)
    t.add_argument("--max-r", type=float, required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--pose-out")
    t.set_defaults(func=cmd_perturb)

    g = sub.add_parser("gradcheck", help="finite-difference check of the analytic gradient")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--instances", type=int, default=500)
    g.add_argument("--tol", type=float, default=1e-5)
    g.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (RegistrationFailedError, DivergedError) as exc:
        print(f"registration failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ParseError, UnsupportedFormatError, EmptyCloudError, InvalidArgumentError,
            DegenerateGeometryError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SGDICPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
