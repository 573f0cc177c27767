"""Geometric-consistency and uniformity measurements.

Consistency compares clouds by directed nearest-neighbor distance
aggregates (Hausdorff = max, mean = average); the report direction
defaults to resampled -> original. Uniformity looks at one cloud alone:
the spread (max - min) of per-point mean k-NN distances, and the spread
of tangent-plane Voronoi cell areas over points whose cell closes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud
from .errors import InsufficientPointsError, ResampleError
from .smoothing import _batched_frames, _batched_normals
from .spatial import knn_indices
from . import _kernels

DIRECTED = "resampled_to_original"
SYMMETRIC = "symmetric"

VORONOI_DEFINITION = "tangent-cell-area-spread"


@dataclass(frozen=True)
class ConsistencyReport:
    hausdorff: float
    mean: float
    direction: str

    def to_dict(self):
        return {
            "hausdorff": self.hausdorff,
            "mean": self.mean,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class UniformityReport:
    d_local: float
    d_voronoi: float
    k: int
    interior_only: bool

    def to_dict(self):
        return {
            "d_local": self.d_local,
            "d_voronoi": self.d_voronoi,
            "k": self.k,
            "interior_only": self.interior_only,
            "voronoi_definition": VORONOI_DEFINITION,
        }


def _points_of(cloud):
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, float)


def _directed_nn(a, b, workers=1):
    dist, _ = cKDTree(b).query(a, k=1, workers=workers)
    return dist


def hausdorff(a, b, symmetric=False, workers=1):
    """max over a of the distance to the closest point of b (directed).

    With ``symmetric`` the larger of the two directed values is returned.
    """
    pa, pb = _points_of(a), _points_of(b)
    h = float(_directed_nn(pa, pb, workers).max())
    if symmetric:
        h = max(h, float(_directed_nn(pb, pa, workers).max()))
    return h


def mean_distance(a, b, symmetric=False, workers=1):
    """Average distance from each point of a to its nearest point of b."""
    pa, pb = _points_of(a), _points_of(b)
    m = float(_directed_nn(pa, pb, workers).mean())
    if symmetric:
        m = max(m, float(_directed_nn(pb, pa, workers).mean()))
    return m


def _closed_mask(pts, neigh, workers=1):
    normals, degenerate = _batched_normals(pts, neigh)
    e1, e2 = _batched_frames(normals, degenerate)
    closed = np.empty(pts.shape[0], dtype=bool)
    _kernels.closed_cell_pass(pts, neigh, e1, e2, degenerate, closed)
    return closed


def local_density_error(cloud, k=6, interior_only=True, workers=1):
    """Spread of per-point mean k-NN distances: max(dbar) - min(dbar).

    dbar_i averages the distances from point i to its k nearest neighbors
    (self excluded). With ``interior_only`` (default), points whose
    tangent-projected Voronoi cell is unclosed are left out of the spread,
    along with anything within two neighborhood hops of such a point, which
    keeps boundary rows of open surfaces from dominating it.
    """
    pts = _points_of(cloud)
    if k + 1 > pts.shape[0]:
        raise InsufficientPointsError("insufficient points")
    neigh, dist = knn_indices(pts, k, workers=workers)
    dbar = dist.mean(axis=1)
    if interior_only:
        keep = _closed_mask(pts, neigh, workers=workers)
        # two erosion rounds: points within two neighborhood hops of an
        # unclosed (boundary) point are boundary-tainted too, so open-surface
        # rims drop out even where jitter pushes a rim point inside its
        # neighbors' hull
        for _ in range(2):
            keep = keep & keep[neigh].all(axis=1)
        if not keep.any():
            raise InsufficientPointsError("insufficient interior points")
        dbar = dbar[keep]
    return float(dbar.max() - dbar.min())


def voronoi_density_error(cloud, k=6, workers=1):
    """Spread of tangent-plane Voronoi cell areas over closed cells.

    Each point and its k nearest neighbors are projected onto the point's
    tangent plane; the point's 2D cell area enters the spread only when the
    cell closes. Requires closed cells at >= 10% of the points.
    """
    pts = _points_of(cloud)
    if k + 1 > pts.shape[0]:
        raise InsufficientPointsError("insufficient points")
    neigh, _ = knn_indices(pts, k, workers=workers)
    normals, degenerate = _batched_normals(pts, neigh)
    e1, e2 = _batched_frames(normals, degenerate)
    areas = np.empty(pts.shape[0])
    closed = np.empty(pts.shape[0], dtype=bool)
    _kernels.cell_area_pass(pts, neigh, e1, e2, degenerate, areas, closed)
    if closed.sum() < 0.1 * pts.shape[0]:
        raise InsufficientPointsError("insufficient interior points")
    kept = areas[closed]
    return float(kept.max() - kept.min())


def consistency_report(resampled, original, symmetric=False, workers=1):
    return ConsistencyReport(
        hausdorff=hausdorff(resampled, original, symmetric=symmetric, workers=workers),
        mean=mean_distance(resampled, original, symmetric=symmetric, workers=workers),
        direction=SYMMETRIC if symmetric else DIRECTED,
    )


def uniformity_report(cloud, k=6, interior_only=True, workers=1):
    return UniformityReport(
        d_local=local_density_error(cloud, k=k, interior_only=interior_only, workers=workers),
        d_voronoi=voronoi_density_error(cloud, k=k, workers=workers),
        k=k,
        interior_only=interior_only,
    )
