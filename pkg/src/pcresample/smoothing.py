"""Exact-count trimming and the iterative tangent smoothing passes."""

import heapq

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .cloud import PointCloud
from .errors import InsufficientPointsError, ResampleError
from .spatial import knn_indices

_CHUNK = 65536


def trim_to_exact_count(cloud, n):
    """Delete points until exactly ``n`` remain, densest spots first.

    Repeatedly removes the point whose current nearest-neighbor distance is
    smallest, recomputing distances among the survivors after every
    deletion; distance ties delete the lower index first. Survivors keep
    their original relative order.
    """
    if n < 1:
        raise ResampleError("target count must be positive")
    if len(cloud) < n:
        raise ResampleError("cannot trim below input size")
    total = len(cloud)
    if total == n:
        return cloud

    pts = cloud.points
    tree = cKDTree(pts)
    alive = np.ones(total, dtype=bool)

    def current_nn(i):
        # nearest *alive* point to i; dead entries are skipped, widening the
        # query until a live one appears
        k = 2
        while True:
            dist, idx = tree.query(pts[i], k=min(k, total))
            for d, j in zip(np.atleast_1d(dist), np.atleast_1d(idx)):
                if j != i and alive[j]:
                    return float(d), int(j)
            if k >= total:
                raise InsufficientPointsError("insufficient points")
            k = min(k * 2, total)

    dist, idx = tree.query(pts, k=2)
    heap = [(float(dist[i, 1]), i, int(idx[i, 1])) for i in range(total)]
    heapq.heapify(heap)

    remaining = total
    while remaining > n:
        d, i, j = heapq.heappop(heap)
        if not alive[i]:
            continue
        if not alive[j]:
            # stale entry: distances only grow as points disappear
            d2, j2 = current_nn(i)
            heapq.heappush(heap, (d2, i, j2))
            continue
        alive[i] = False
        remaining -= 1
    return cloud.take(np.flatnonzero(alive))


def _batched_normals(pts, neigh):
    """PCA normal, frames, and a degeneracy mask for every point at once."""
    n, k = neigh.shape
    normals = np.empty((n, 3))
    degenerate = np.zeros(n, dtype=bool)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        group = np.concatenate(
            [pts[lo:hi, None, :], pts[neigh[lo:hi]]], axis=1
        )
        centered = group - group.mean(axis=1, keepdims=True)
        cov = np.einsum("npi,npj->nij", centered, centered) / (k + 1)
        evals, evecs = np.linalg.eigh(cov)
        normals[lo:hi] = evecs[:, :, 0]
        degenerate[lo:hi] = (evals[:, 2] <= 0.0) | (
            evals[:, 1] <= 1e-12 * evals[:, 2]
        )
    # deterministic orientation: positive z, then y, then x
    s = np.sign(normals[:, 2])
    s = np.where(s == 0.0, np.sign(normals[:, 1]), s)
    s = np.where(s == 0.0, np.sign(normals[:, 0]), s)
    s = np.where(s == 0.0, 1.0, s)
    normals *= s[:, None]
    return normals, degenerate


def _batched_frames(normals, degenerate):
    n = normals.shape[0]
    axis = np.zeros((n, 3))
    axis[np.arange(n), np.argmin(np.abs(normals), axis=1)] = 1.0
    e1 = np.cross(axis, normals)
    norms = np.linalg.norm(e1, axis=1)
    norms[degenerate | (norms == 0.0)] = 1.0
    e1 /= norms[:, None]
    e2 = np.cross(normals, e1)
    return e1, e2


def edge_freeze_mask(classes, neigh):
    """Edge points with at least one normal-class neighbor stay put."""
    is_edge = classes == 1
    has_normal_neighbor = (classes[neigh] == 0).any(axis=1)
    return is_edge & has_normal_neighbor


def smooth(
    cloud,
    k=16,
    iterations=5,
    classes=None,
    snap_back=False,
    snap_reference=None,
    workers=1,
):
    """Run Jacobi tangent-smoothing passes over the cloud.

    Each pass rebuilds the neighbor index on the pass-start snapshot,
    estimates a PCA normal and tangent frame per point, and moves every
    eligible point to the cotangent-weighted centroid of its projected
    neighbors. Points are frozen for a pass when their cell is not closed,
    their neighborhood is degenerate, or they are protected edge points
    (edge class with a normal-class neighbor); frozen points keep their
    position bit-for-bit. Count and order never change.

    ``snap_back`` moves every displaced point to its nearest point of
    ``snap_reference`` (default: the input cloud) after the final pass.
    """
    if k < 3:
        raise ResampleError("k must be at least 3")
    if k + 1 > len(cloud):
        raise ResampleError("insufficient points")
    if classes is None:
        classes = cloud.classes

    start = cloud.points
    cur = start
    for _ in range(iterations):
        neigh, _dist = knn_indices(cur, k, workers=workers)
        normals, degenerate = _batched_normals(cur, neigh)
        e1, e2 = _batched_frames(normals, degenerate)
        skip = degenerate
        if classes is not None:
            skip = skip | edge_freeze_mask(classes, neigh)
        out = np.empty_like(cur)
        closed = np.empty(len(cur), dtype=bool)
        _kernels.smooth_pass(cur, neigh, e1, e2, skip, out, closed)
        cur = out

    if snap_back and iterations > 0:
        ref = snap_reference.points if snap_reference is not None else start
        moved = np.flatnonzero((cur != start).any(axis=1))
        if moved.size:
            _, nearest = cKDTree(ref).query(cur[moved], workers=workers)
            cur = cur.copy()
            cur[moved] = ref[nearest]

    return cloud.with_points(cur)
