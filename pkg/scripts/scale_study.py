"""Rerun identical registrations with coordinates scaled by several factors.

Normalization makes the step size independent of spatial extent, so the
recovered rotation and the rescaled translation should not depend on the
factor.
"""
import argparse

import numpy as np

from sgdicp.geometry import PointCloud, RigidParams
from sgdicp.harness import perturb, rotational_error
from sgdicp.registration import RegistrationConfig, sgd_icp
from sgdicp.synthetic import make_primitive


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--factors", type=float, nargs="+", default=[0.01, 1.0, 100.0, 1e4])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--points", type=int, default=5000)
    args = ap.parse_args()

    cloud = make_primitive("room-corner", args.points, seed=0)
    print(f"{'factor':>10}{'max rot diff':>15}{'max rel trans diff':>20}")
    for c in args.factors:
        rot, rel = 0.0, 0.0
        for seed in range(args.trials):
            ref, _ = perturb(cloud, 0.1, 0.1, seed=seed)
            cfg = RegistrationConfig(seed=seed)
            base = sgd_icp(cloud, ref, config=cfg).theta
            est = sgd_icp(PointCloud(cloud.points * c), PointCloud(ref.points * c), config=cfg).theta
            est = RigidParams.from_rt(est.rotation(), est.translation / c)
            rot = max(rot, rotational_error(est, base))
            rel = max(rel, np.linalg.norm(est.translation - base.translation) / np.linalg.norm(base.translation))
        print(f"{c:>10g}{rot:>15.2e}{rel:>20.2e}")


if __name__ == "__main__":
    main()
