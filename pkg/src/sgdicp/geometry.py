"""Rigid transforms parametrised by translation and roll/pitch/yaw.

Rotation convention (kept in :func:`rotation_from_euler` only)::

    R = Rz(yaw) @ Ry(pitch) @ Rx(roll)

A point ``s`` is mapped to ``R @ s + t``. At pitch = +-pi/2 the angles
degenerate (gimbal lock); the Jacobians stay well defined there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, EmptyCloudError, InvalidArgumentError


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidArgumentError(f"expected an (N, 3) array of points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered set of 3D points.

    ``unit_scale`` is meters per coordinate unit (1.0 for raw clouds,
    the normalization scale for clouds mapped into the unit box).
    """

    points: np.ndarray
    unit_scale: float = 1.0
    frame: str = ""

    def __post_init__(self):
        arr = _as_points(self.points)
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("point cloud contains non-finite coordinates")
        if not (self.unit_scale > 0 and math.isfinite(self.unit_scale)):
            raise InvalidArgumentError(f"unit_scale must be positive, got {self.unit_scale}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (
            self.unit_scale == other.unit_scale
            and self.frame == other.frame
            and np.array_equal(self.points, other.points)
        )

    def with_points(self, points) -> "PointCloud":
        return PointCloud(points, unit_scale=self.unit_scale, frame=self.frame)


@dataclass(frozen=True)
class RigidParams:
    """Six-parameter rigid transform: translation then roll, pitch, yaw (radians)."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "roll", "pitch", "yaw"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values) -> "RigidParams":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size != 6:
            raise InvalidArgumentError(f"expected 6 parameters, got {values.size}")
        return cls(*values.tolist())

    @classmethod
    def from_rt(cls, rotation, translation) -> "RigidParams":
        return cls(*np.asarray(translation, dtype=np.float64).tolist(), *euler_from_rotation(rotation))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.roll, self.pitch, self.yaw])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw])

    def rotation(self) -> np.ndarray:
        return rotation_from_euler(self.angles)

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        T = np.eye(4)
        T[:3, :3] = self.rotation()
        T[:3, 3] = self.translation
        return T

    def inverse(self) -> "RigidParams":
        R = self.rotation()
        return RigidParams.from_rt(R.T, -R.T @ self.translation)

    def compose(self, other: "RigidParams") -> "RigidParams":
        """Transform equal to applying ``other`` first, then ``self``."""
        R1, R2 = self.rotation(), other.rotation()
        return RigidParams.from_rt(R1 @ R2, R1 @ other.translation + self.translation)


@dataclass(frozen=True)
class NormalizationInfo:
    """Map p -> (p - center) / scale shared by a source/reference pair."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(3).copy()
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidArgumentError(f"scale must be positive, got {self.scale}")

    def apply(self, points) -> np.ndarray:
        return (_as_points(points) - self.center) / self.scale

    def undo(self, points) -> np.ndarray:
        return _as_points(points) * self.scale + self.center


def _check_angles(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=np.float64).reshape(-1)
    if a.size != 3:
        raise InvalidArgumentError(f"expected (roll, pitch, yaw), got {a.size} values")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("rotation angles must be finite")
    return a


def _rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _ry(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _drx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])


def _dry(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])


def _drz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def rotation_from_euler(angles) -> np.ndarray:
    """Rotation matrix for (roll, pitch, yaw) in radians, ``Rz(yaw) Ry(pitch) Rx(roll)``."""
    roll, pitch, yaw = _check_angles(angles)
    return _rz(yaw) @ _ry(pitch) @ _rx(roll)


def rotation_jacobians(angles) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic partials of :func:`rotation_from_euler` w.r.t. roll, pitch and yaw."""
    roll, pitch, yaw = _check_angles(angles)
    Rx, Ry, Rz = _rx(roll), _ry(pitch), _rz(yaw)
    return (
        Rz @ Ry @ _drx(roll),
        Rz @ _dry(pitch) @ Rx,
        _drz(yaw) @ Ry @ Rx,
    )


def euler_from_rotation(R) -> tuple[float, float, float]:
    """Inverse of :func:`rotation_from_euler`; returns angles in (-pi, pi]."""
    R = np.asarray(R, dtype=np.float64)
    pitch = math.atan2(-R[2, 0], math.hypot(R[0, 0], R[1, 0]))
    if math.hypot(R[2, 1], R[2, 2]) > 1e-12:
        roll = math.atan2(R[2, 1], R[2, 2])
        yaw = math.atan2(R[1, 0], R[0, 0])
    else:
        # gimbal lock: only roll -/+ yaw is observable, put it all in roll
        yaw = 0.0
        roll = math.atan2(-R[1, 2], R[1, 1])
    return wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def transform_points(points, params: RigidParams) -> np.ndarray:
    pts = _as_points(points)
    return pts @ params.rotation().T + params.translation


def apply_transform(cloud: PointCloud, params: RigidParams) -> PointCloud:
    """Map every point ``s`` of ``cloud`` to ``R s + t``, keeping order."""
    return cloud.with_points(transform_points(cloud.points, params))


def normalize_pair(source: PointCloud, reference: PointCloud):
    """Shift and uniformly scale both clouds into the unit box.

    The joint axis-aligned bounding box is moved to the origin and divided
    by its largest extent, so the same rigid motion is preserved in both.

    Returns
    -------
    (source', reference', NormalizationInfo)
    """
    if len(source) == 0 or len(reference) == 0:
        raise EmptyCloudError("cannot normalize an empty point cloud")
    joint = np.vstack([source.points, reference.points])
    lo, hi = joint.min(axis=0), joint.max(axis=0)
    scale = float(np.max(hi - lo))
    if not scale > 0.0:
        raise DegenerateGeometryError("all points coincide; joint bounding box has zero extent")
    info = NormalizationInfo(center=lo, scale=scale)
    src = PointCloud(info.apply(source.points), unit_scale=source.unit_scale * scale, frame=source.frame)
    ref = PointCloud(info.apply(reference.points), unit_scale=reference.unit_scale * scale, frame=reference.frame)
    return src, ref, info


def denormalize_params(params: RigidParams, info: NormalizationInfo) -> RigidParams:
    """Express a transform estimated in the normalized frame in raw coordinates."""
    R = params.rotation()
    t = info.scale * params.translation + (np.eye(3) - R) @ info.center
    return RigidParams(*t.tolist(), params.roll, params.pitch, params.yaw)


def normalize_params(params: RigidParams, info: NormalizationInfo) -> RigidParams:
    """Inverse of :func:`denormalize_params`."""
    R = params.rotation()
    t = (params.translation - (np.eye(3) - R) @ info.center) / info.scale
    return RigidParams(*t.tolist(), params.roll, params.pitch, params.yaw)
