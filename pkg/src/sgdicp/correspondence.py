"""Exact nearest-neighbour search and correspondence construction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloudError, InvalidArgumentError
from .geometry import PointCloud, _as_points

# relative slack used to flag candidate ties before re-checking them exactly
_TIE_RTOL = 1e-9


class Neighbor(NamedTuple):
    index: int
    point: np.ndarray
    distance: float


class NNIndex:
    """Exact Euclidean nearest-neighbour index over a reference cloud.

    Backed by a balanced k-d tree. Distances are always recomputed as
    ``sqrt(sum((r - q)**2))`` so results match a linear scan bit for bit,
    and equidistant candidates resolve to the lowest reference index.
    """

    def __init__(self, reference: PointCloud | np.ndarray):
        points = reference.points if isinstance(reference, PointCloud) else _as_points(reference)
        if points.shape[0] == 0:
            raise EmptyCloudError("cannot build a nearest-neighbour index over an empty cloud")
        self._points = np.array(points, dtype=np.float64)
        self._points.setflags(write=False)
        self._tree = cKDTree(self._points, balanced_tree=True, compact_nodes=True)

    def __len__(self):
        return self._points.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self._points

    def query(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Nearest reference index and distance for each row of ``queries``."""
        q = _as_points(queries)
        if not np.all(np.isfinite(q)):
            raise InvalidArgumentError("nearest-neighbour query contains non-finite coordinates")
        n = len(self)
        if q.shape[0] == 0:
            return np.empty(0, dtype=np.intp), np.empty(0)
        k = min(2, n)
        d, idx = self._tree.query(q, k=k)
        if k == 1:
            d, idx = d[:, None], idx[:, None]
        best = idx[:, 0].astype(np.intp)
        if k == 2:
            maybe_tie = d[:, 1] <= d[:, 0] * (1.0 + _TIE_RTOL) + 1e-300
            for row in np.flatnonzero(maybe_tie):
                best[row] = self._resolve(q[row], d[row, 1])
        diff = self._points[best] - q
        dist = np.sqrt(np.sum(diff * diff, axis=1))
        return best, dist

    def _resolve(self, query, radius):
        radius = radius * (1.0 + 4 * _TIE_RTOL) + 1e-300
        k = min(16, len(self))
        d, cand = self._tree.query(query, k=k)
        if k == len(self) or d[-1] > radius:
            cand = np.asarray(cand[d <= radius], dtype=np.intp)
        else:
            cand = np.asarray(self._tree.query_ball_point(query, radius), dtype=np.intp)
        diff = self._points[cand] - query
        dist = np.sqrt(np.sum(diff * diff, axis=1))
        winners = cand[dist == dist.min()]
        return int(winners.min())


def build_index(reference: PointCloud) -> NNIndex:
    return NNIndex(reference)


def nearest(index: NNIndex, query) -> Neighbor:
    """Closest reference point to a single query point (lowest index on ties)."""
    q = np.asarray(query, dtype=np.float64).reshape(1, 3)
    idx, dist = index.query(q)
    i = int(idx[0])
    return Neighbor(i, index.points[i].copy(), float(dist[0]))


@dataclass(frozen=True)
class CorrespondencePairs:
    """Matched pairs surviving the distance threshold.

    ``batch_size`` is the number of points drawn for the batch, before
    rejection; it is kept so the gradient can divide by either count.
    """

    source_index: np.ndarray
    transformed: np.ndarray
    reference: np.ndarray
    distance: np.ndarray
    batch_size: int

    def __len__(self):
        return self.source_index.shape[0]

    @property
    def rejected(self) -> int:
        return self.batch_size - len(self)


def match_batch(batch, index: NNIndex, d_max: float, source_index=None) -> CorrespondencePairs:
    """Pair every transformed batch point with its nearest reference point.

    Pairs further apart than ``d_max`` are dropped; order follows the batch.
    An all-rejected batch yields an empty result rather than an error.
    """
    if not d_max > 0:
        raise InvalidArgumentError(f"d_max must be positive, got {d_max}")
    pts = _as_points(batch)
    if source_index is None:
        source_index = np.arange(pts.shape[0])
    source_index = np.asarray(source_index, dtype=np.intp)
    ref_idx, dist = index.query(pts)
    keep = dist <= d_max
    return CorrespondencePairs(
        source_index=source_index[keep],
        transformed=pts[keep],
        reference=index.points[ref_idx[keep]],
        distance=dist[keep],
        batch_size=pts.shape[0],
    )
