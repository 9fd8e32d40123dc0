"""Finite-difference check of the analytic ICP gradient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correspondence import CorrespondencePairs
from .geometry import rotation_from_euler
from .registration import compute_gradient


@dataclass
class GradcheckReport:
    instances: int
    max_rel_err: float
    worst_instance: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tol


def _objective(theta, s, r, divisor):
    # written out independently of registration.batch_objective
    R = rotation_from_euler(theta[3:])
    total = 0.0
    for si, ri in zip(s, r):
        e = R @ si + theta[:3] - ri
        total += float(e @ e)
    return total / (4.0 * divisor)


def central_difference(theta, s, r, divisor, h=1e-6) -> np.ndarray:
    g = np.empty(6)
    for k in range(6):
        tp, tm = theta.copy(), theta.copy()
        tp[k] += h
        tm[k] -= h
        g[k] = (_objective(tp, s, r, divisor) - _objective(tm, s, r, divisor)) / (2 * h)
    return g


def random_instance(rng):
    n = int(rng.integers(1, 40))
    s = rng.uniform(0.0, 1.0, (n, 3))
    r = s + rng.normal(scale=0.2, size=(n, 3))
    theta = np.r_[rng.uniform(-0.5, 0.5, 3), rng.uniform(-np.pi, np.pi, 3)]
    pairs = CorrespondencePairs(
        source_index=np.arange(n), transformed=s.copy(), reference=r,
        distance=np.linalg.norm(r - s, axis=1), batch_size=n,
    )
    return pairs, theta, s


def run_gradcheck(instances: int = 500, seed: int = 0, tol: float = 1e-5, h: float = 1e-6) -> GradcheckReport:
    """Compare :func:`compute_gradient` with central differences on random problems.

    Relative error per instance is ``|g - g_fd|_inf / max(|g_fd|_inf, 1e-8)``.
    """
    rng = np.random.default_rng(seed)
    worst, worst_i = 0.0, -1
    for i in range(instances):
        pairs, theta, s = random_instance(rng)
        analytic = compute_gradient(pairs, theta, s)
        numeric = central_difference(theta, s, pairs.reference, pairs.batch_size, h=h)
        err = np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-8)
        if err > worst:
            worst, worst_i = float(err), i
    return GradcheckReport(instances, worst, worst_i, tol)
