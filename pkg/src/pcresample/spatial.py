"""Exact nearest-neighbor and radius queries over a fixed point snapshot."""

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud, _as_positions
from .errors import InsufficientPointsError, ResampleError


def _canonical_order(dist, idx):
    # lexicographic (distance, index): stable-sort by index, then by distance
    order = np.argsort(idx, kind="stable")
    dist, idx = dist[order], idx[order]
    order = np.argsort(dist, kind="stable")
    return dist[order], idx[order]


class SpatialIndex:
    """k-NN and radius queries over a snapshot of points.

    Results are exact (kd-tree, no approximation) and deterministic: equal
    distances are ordered by ascending point index. The snapshot is copied
    at build time; the index never observes later mutation.
    """

    def __init__(self, points):
        pts = points.points if isinstance(points, PointCloud) else _as_positions(points)
        self._points = pts.copy()
        self._points.flags.writeable = False
        self._tree = cKDTree(self._points)

    @property
    def size(self):
        return self._points.shape[0]

    @property
    def points(self):
        return self._points

    def knn(self, q, k, exclude_self=False):
        """The k nearest points to ``q``.

        Returns (indices, distances) ascending by distance, ties broken by
        ascending index. With ``exclude_self`` one zero-distance hit (the
        query point itself, when it is a member of the snapshot) is dropped.
        """
        if k < 1:
            raise ResampleError("k must be at least 1")
        budget = self.size - 1 if exclude_self else self.size
        if k > budget:
            raise InsufficientPointsError("insufficient points")
        q = np.asarray(q, dtype=np.float64).reshape(3)
        want = min(k + 1, self.size) if exclude_self else k
        dist, idx = self._tree.query(q, k=want)
        dist = np.atleast_1d(np.asarray(dist, dtype=np.float64))
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        dist, idx = _canonical_order(dist, idx)
        if exclude_self:
            zero = np.flatnonzero(dist == 0.0)
            drop = zero[0] if zero.size else len(dist) - 1
            dist = np.delete(dist, drop)
            idx = np.delete(idx, drop)
        return idx[:k], dist[:k]

    def radius_query(self, q, r):
        """Indices of points strictly inside the open ball of radius ``r``.

        A point at distance exactly ``r`` is excluded. Indices come back in
        ascending order.
        """
        if r <= 0:
            raise ResampleError("radius must be positive")
        q = np.asarray(q, dtype=np.float64).reshape(3)
        cand = np.asarray(self._tree.query_ball_point(q, r), dtype=np.int64)
        if cand.size == 0:
            return cand
        d = np.linalg.norm(self._points[cand] - q, axis=1)
        return np.sort(cand[d < r])


def knn_indices(points, k, workers=1):
    """Self-excluded k-NN over a whole snapshot at once.

    Returns (indices, distances), each (n, k), row i listing the k nearest
    points to point i (point i itself removed), in (distance, index) order.
    Shared by the smoothing passes, the edge detector, and the metrics.
    """
    pts = points.points if isinstance(points, PointCloud) else _as_positions(points)
    n = pts.shape[0]
    if k + 1 > n:
        raise InsufficientPointsError("insufficient points")
    tree = cKDTree(pts)
    dist, idx = tree.query(pts, k=k + 1, workers=workers)
    idx = idx.astype(np.int64)
    # (distance, index) canonical order within each row
    order = np.argsort(idx, axis=1, kind="stable")
    dist = np.take_along_axis(dist, order, axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    order = np.argsort(dist, axis=1, kind="stable")
    dist = np.take_along_axis(dist, order, axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    # drop each row's own point: the first zero-distance entry whose index
    # matches the row, else the first zero-distance entry (exact duplicates)
    rows = np.arange(n)
    self_col = (idx == rows[:, None]) & (dist == 0.0)
    has_self = self_col.any(axis=1)
    drop = np.where(has_self, self_col.argmax(axis=1), 0)
    keep = np.ones((n, k + 1), dtype=bool)
    keep[rows, drop] = False
    out_idx = idx[keep].reshape(n, k)
    out_dist = dist[keep].reshape(n, k)
    return out_idx, out_dist
