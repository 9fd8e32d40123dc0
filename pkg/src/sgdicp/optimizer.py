"""Mini-batch sampling and step-size schedules."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedError, InvalidArgumentError


class BatchSampler:
    """Draws source indices without replacement, reshuffling once the pool is empty.

    Every index is returned exactly once per epoch. When a batch straddles
    an epoch boundary, the fresh permutation is reordered so that indices
    already in the partial batch come last; a batch therefore never holds
    the same index twice.
    """

    def __init__(self, n: int, seed: int = 0):
        if n < 1:
            raise InvalidArgumentError(f"sampler needs at least one index, got n={n}")
        self.n = int(n)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.pool = self.rng.permutation(self.n)
        self.cursor = 0
        self.epoch = 0

    def next_batch(self, m: int) -> np.ndarray:
        if not 1 <= m <= self.n:
            raise InvalidArgumentError(f"batch size must be in [1, {self.n}], got {m}")
        take = min(m, self.n - self.cursor)
        head = self.pool[self.cursor:self.cursor + take]
        self.cursor += take
        if take == m:
            return head.copy()
        self._reshuffle(exclude=head)
        rest = self.pool[:m - take]
        self.cursor = m - take
        return np.concatenate([head, rest])

    def _reshuffle(self, exclude):
        perm = self.rng.permutation(self.n)
        clash = np.isin(perm, exclude)
        self.pool = np.concatenate([perm[~clash], perm[clash]])
        self.cursor = 0
        self.epoch += 1


def next_batch(sampler: BatchSampler, m: int) -> np.ndarray:
    return sampler.next_batch(m)


def _check_grad(grad) -> np.ndarray:
    g = np.asarray(grad, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(g)):
        raise DivergedError(f"non-finite gradient {g}")
    return g


def step_fixed(theta, grad, alpha: float) -> np.ndarray:
    """Plain gradient step ``theta - alpha * grad`` (identity preconditioner)."""
    g = _check_grad(grad)
    return np.asarray(theta, dtype=np.float64) - alpha * g


@dataclass
class OptimizerState:
    """Step-size schedule state for one registration run.

    ``schedule`` is ``"fixed"`` or ``"adam"``; the moment vectors are only
    used by ADAM and start at zero.
    """

    schedule: str = "fixed"
    alpha: float = 2.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray = field(default_factory=lambda: np.zeros(6))
    v: np.ndarray = field(default_factory=lambda: np.zeros(6))
    step_count: int = 0

    def __post_init__(self):
        if self.schedule not in ("fixed", "adam"):
            raise InvalidArgumentError(f"unknown schedule {self.schedule!r}")
        if not self.alpha > 0:
            raise InvalidArgumentError(f"step size must be positive, got {self.alpha}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidArgumentError("ADAM decay rates must lie in [0, 1)")
        if not self.eps > 0:
            raise InvalidArgumentError("ADAM eps must be positive")

    def step(self, theta, grad) -> np.ndarray:
        """Advance in place and return the updated parameters."""
        if self.schedule == "fixed":
            self.step_count += 1
            return step_fixed(theta, grad, self.alpha)
        theta, new = step_adam(self, theta, grad)
        self.m, self.v, self.step_count = new.m, new.v, new.step_count
        return theta


def step_adam(state: OptimizerState, theta, grad):
    """One bias-corrected ADAM step. Returns ``(theta, new_state)``; ``state`` is untouched."""
    g = _check_grad(grad)
    t = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    theta = np.asarray(theta, dtype=np.float64) - state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    return theta, dataclasses.replace(state, m=m, v=v, step_count=t)
