"""SGD-ICP and its full-batch counterpart.

Both solvers minimise the point-to-point ICP loss by gradient steps on
``theta = (x, y, z, roll, pitch, yaw)``. Each iteration transforms a batch
of source points with the current estimate, pairs them with their nearest
reference points, drops pairs further apart than ``d_max`` and takes one
step along

    grad_k = 1/(2 m) * sum_i e_i . d(R s_i + t)/d theta_k,    e_i = R s_i + t - r_i

The factor ``1/(2m)`` is kept exactly; with ``alpha = 2`` the translation
part of a fixed step moves by the mean residual.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .correspondence import CorrespondencePairs, NNIndex, match_batch
from .errors import (
    DegenerateGeometryError,
    EmptyCloudError,
    InvalidArgumentError,
    NoCorrespondencesError,
    RegistrationFailedError,
)
from .geometry import (
    PointCloud,
    RigidParams,
    denormalize_params,
    normalize_pair,
    normalize_params,
    rotation_from_euler,
    rotation_jacobians,
)
from .optimizer import BatchSampler, OptimizerState


FIXED_STEP_SIZE = 2.0
# ADAM moves each parameter by ~alpha per step, so the fixed-step value is far too large
ADAM_STEP_SIZE = 0.01


@dataclass(frozen=True)
class RegistrationConfig:
    batch_size: int = 160
    step_size: float | None = None  # None -> 2.0 for "fixed", ADAM_STEP_SIZE for "adam"
    d_max: float = 0.5
    schedule: str = "fixed"
    max_iterations: int | None = None  # None -> 200 epochs, 200 * ceil(N / m)
    tol: float = 1e-5
    window: int = 20
    seed: int = 0
    normalize: bool = True
    divide_by: str = "survivors"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.step_size is None:
            object.__setattr__(self, "step_size", FIXED_STEP_SIZE if self.schedule == "fixed" else ADAM_STEP_SIZE)
        if self.batch_size < 1:
            raise InvalidArgumentError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.step_size > 0:
            raise InvalidArgumentError(f"step_size must be positive, got {self.step_size}")
        if not self.d_max > 0:
            raise InvalidArgumentError(f"d_max must be positive, got {self.d_max}")
        if self.schedule not in ("fixed", "adam"):
            raise InvalidArgumentError(f"schedule must be 'fixed' or 'adam', got {self.schedule!r}")
        if self.window < 1:
            raise InvalidArgumentError(f"window must be >= 1, got {self.window}")
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol}")
        if self.divide_by not in ("batch", "survivors"):
            raise InvalidArgumentError(f"divide_by must be 'batch' or 'survivors', got {self.divide_by!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidArgumentError(f"max_iterations must be >= 1, got {self.max_iterations}")

    def iteration_budget(self, n_source: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        m = min(self.batch_size, n_source)
        return 200 * math.ceil(n_source / m)


@dataclass(frozen=True)
class IterationRecord:
    theta: RigidParams  # raw (denormalized) frame
    rms: float  # RMS residual of surviving pairs, normalized frame; nan if none survived
    rejected: int
    points_processed: int  # cumulative
    elapsed: float  # seconds since the loop started


@dataclass
class RegistrationResult:
    theta: RigidParams
    converged: bool
    iterations: int
    points_processed: int
    trace: list[IterationRecord] = field(default_factory=list)
    info: object = None  # NormalizationInfo used, if any


def compute_gradient(pairs: CorrespondencePairs, theta, source_points, divisor: int | None = None) -> np.ndarray:
    """Gradient of the batch ICP loss with fixed correspondences.

    ``source_points`` are the untransformed source coordinates, indexed by
    ``pairs.source_index``. ``divisor`` defaults to the drawn batch size.
    """
    if len(pairs) == 0:
        raise NoCorrespondencesError("cannot compute a gradient without correspondences")
    theta = theta.as_array() if isinstance(theta, RigidParams) else np.asarray(theta, dtype=np.float64)
    d = pairs.batch_size if divisor is None else divisor
    s = np.asarray(source_points, dtype=np.float64)[pairs.source_index]
    R = rotation_from_euler(theta[3:])
    e = s @ R.T + theta[:3] - pairs.reference
    grad = np.empty(6)
    grad[:3] = e.sum(axis=0)
    for k, dR in enumerate(rotation_jacobians(theta[3:])):
        grad[3 + k] = np.sum(e * (s @ dR.T))
    return grad / (2.0 * d)


def batch_objective(pairs: CorrespondencePairs, theta, source_points, divisor: int | None = None) -> float:
    """Scalar whose gradient :func:`compute_gradient` returns: ``sum ||e_i||^2 / (4 m)``."""
    theta = theta.as_array() if isinstance(theta, RigidParams) else np.asarray(theta, dtype=np.float64)
    d = pairs.batch_size if divisor is None else divisor
    s = np.asarray(source_points, dtype=np.float64)[pairs.source_index]
    e = s @ rotation_from_euler(theta[3:]).T + theta[:3] - pairs.reference
    return float(np.sum(e * e) / (4.0 * d))


def check_convergence(thetas, tol: float) -> bool:
    """True when the net per-component displacement over the window, divided by
    the number of steps in it, is below ``tol`` for all six parameters.

    Zero-mean oscillation therefore counts as converged.
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.shape[0] < 2:
        return False
    steps = thetas.shape[0] - 1
    mean_change = np.abs(thetas[-1] - thetas[0]) / steps
    return bool(np.all(mean_change < tol))


def svd_align(pairs_or_source, reference=None) -> RigidParams:
    """Closed-form least-squares rigid transform between matched points.

    Accepts either a :class:`CorrespondencePairs` (aligning ``transformed``
    onto ``reference``) or two (N, 3) arrays.
    """
    if isinstance(pairs_or_source, CorrespondencePairs):
        src, ref = pairs_or_source.transformed, pairs_or_source.reference
    else:
        src = np.asarray(pairs_or_source, dtype=np.float64)
        ref = np.asarray(reference, dtype=np.float64)
    if src.shape != ref.shape or src.ndim != 2 or src.shape[1] != 3:
        raise InvalidArgumentError("svd_align needs two (N, 3) arrays of equal shape")
    if src.shape[0] < 3:
        raise DegenerateGeometryError("need at least 3 pairs")
    cs, cr = src.mean(axis=0), ref.mean(axis=0)
    A, B = src - cs, ref - cr
    # rank check: both sets must span at least a plane
    for X in (A, B):
        sv = np.linalg.svd(X, compute_uv=False)
        if sv[1] <= 1e-12 * max(sv[0], 1e-300):
            raise DegenerateGeometryError("points are collinear or coincident")
    H = A.T @ B
    U, _, Vt = np.linalg.svd(H)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
    R = Vt.T @ D @ U.T
    return RigidParams.from_rt(R, cr - R @ cs)


def _solve(source: PointCloud, reference: PointCloud, theta0: RigidParams, config: RegistrationConfig, full_batch: bool):
    if len(source) == 0 or len(reference) == 0:
        raise EmptyCloudError("source and reference must be non-empty")
    theta0 = theta0 if isinstance(theta0, RigidParams) else RigidParams.from_array(theta0)
    info = None
    if config.normalize:
        source, reference, info = normalize_pair(source, reference)
        theta = normalize_params(theta0, info).as_array()
    else:
        theta = theta0.as_array()

    def to_raw(th):
        p = RigidParams.from_array(th)
        return denormalize_params(p, info) if info is not None else p

    src = source.points
    n = src.shape[0]
    m = n if full_batch else min(config.batch_size, n)
    index = NNIndex(reference)
    sampler = None if full_batch else BatchSampler(n, config.seed)
    state = OptimizerState(
        schedule=config.schedule, alpha=config.step_size,
        beta1=config.beta1, beta2=config.beta2, eps=config.eps,
    )
    all_idx = np.arange(n)
    budget = config.iteration_budget(n)

    history = [theta.copy()]
    trace: list[IterationRecord] = []
    points = 0
    empty_run = 0
    converged = False
    start = time.perf_counter()
    for _ in range(budget):
        idx = all_idx if full_batch else sampler.next_batch(m)
        R = rotation_from_euler(theta[3:])
        moved = src[idx] @ R.T + theta[:3]
        pairs = match_batch(moved, index, config.d_max, source_index=idx)
        points += m
        if len(pairs) == 0:
            empty_run += 1
            rms = math.nan
        else:
            empty_run = 0
            divisor = len(pairs) if config.divide_by == "survivors" else m
            grad = compute_gradient(pairs, theta, src, divisor=divisor)
            theta = state.step(theta, grad)
            rms = float(np.sqrt(np.mean(pairs.distance ** 2)))
        history.append(theta.copy())
        trace.append(IterationRecord(to_raw(theta), rms, pairs.rejected, points, time.perf_counter() - start))
        if empty_run >= config.window:
            raise RegistrationFailedError(
                f"no correspondences within d_max={config.d_max} for {empty_run} consecutive "
                f"iterations (iteration {len(trace)}); initial guess too far or d_max too small"
            )
        if len(history) > config.window:
            if check_convergence(history[-(config.window + 1):], config.tol):
                converged = True
                break
    return RegistrationResult(
        theta=to_raw(theta), converged=converged, iterations=len(trace),
        points_processed=points, trace=trace, info=info,
    )


def sgd_icp(source: PointCloud, reference: PointCloud, theta0: RigidParams | None = None,
            config: RegistrationConfig | None = None) -> RegistrationResult:
    """Register ``source`` onto ``reference`` with mini-batch SGD.

    The returned ``theta`` maps raw source coordinates onto the reference.
    Deterministic for a fixed ``config.seed``.
    """
    return _solve(source, reference, theta0 or RigidParams(), config or RegistrationConfig(), full_batch=False)


def batch_icp(source: PointCloud, reference: PointCloud, theta0: RigidParams | None = None,
              config: RegistrationConfig | None = None) -> RegistrationResult:
    """Full-batch gradient descent on the same loss (every point, every iteration)."""
    config = config or RegistrationConfig()
    config = replace(config, batch_size=max(len(source), 1))
    return _solve(source, reference, theta0 or RigidParams(), config, full_batch=True)
