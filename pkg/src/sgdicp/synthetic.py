"""Synthetic point-cloud primitives used by the benchmark harness.

All primitives fit in the unit cube, so perturbation ranges given in raw
units are close to normalized units.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .geometry import PointCloud

PRIMITIVES = ("plane", "box", "sphere-shell", "room-corner")


def _plane(n, rng):
    p = rng.uniform(0.0, 1.0, (n, 3))
    p[:, 2] = 0.0
    return p


def _box(n, rng):
    # surface of the unit cube, faces sampled proportionally to area (equal)
    face = rng.integers(0, 6, n)
    p = rng.uniform(0.0, 1.0, (n, 3))
    axis = face % 3
    p[np.arange(n), axis] = (face >= 3).astype(float)
    return p


def _sphere_shell(n, rng):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return 0.5 + 0.5 * v


def _room_corner(n, rng):
    # three orthogonal unit squares sharing the origin corner
    sizes = [n // 3, n // 3, n - 2 * (n // 3)]
    parts = []
    for axis, k in enumerate(sizes):
        p = rng.uniform(0.0, 1.0, (k, 3))
        p[:, axis] = 0.0
        parts.append(p)
    return np.vstack(parts)


_MAKERS = {"plane": _plane, "box": _box, "sphere-shell": _sphere_shell, "room-corner": _room_corner}


def make_primitive(kind: str, n: int, noise: float = 0.0, seed: int = 0) -> PointCloud:
    """Sample ``n`` points from a primitive, with optional isotropic Gaussian noise."""
    if kind not in _MAKERS:
        raise InvalidArgumentError(f"unknown primitive {kind!r}; choose from {', '.join(PRIMITIVES)}")
    if n < 1:
        raise InvalidArgumentError(f"point count must be >= 1, got {n}")
    if noise < 0:
        raise InvalidArgumentError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    pts = _MAKERS[kind](n, rng)
    if noise > 0:
        pts = pts + rng.normal(scale=noise, size=pts.shape)
    return PointCloud(pts, frame=kind)
