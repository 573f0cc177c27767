"""Count-controlled Poisson-disk selection.

The disk radius comes from an area estimate: each selected point claims a
disk of radius r, overlap is absorbed by a decay factor, so for a surface
of area S and a target of n points, S = decay * n * pi * r^2. The voxel
grid supplies S as (occupied voxels) * (edge length)^2; a bounding-box
variant is kept as the legacy baseline. Sampling itself is dart throwing
over a seeded random permutation of the INPUT points: the output is always
a subset of the input, never synthesized positions. An iterative loop then
nudges the radius until the accepted count lands in [n, 1.05n].
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cloud import PointCloud
from .errors import ConvergenceError, InsufficientPointsError, ResampleError

DEFAULT_DECAY = 0.68
THETA_1 = 1.8
THETA_2 = 3.0
COUNT_TOLERANCE = 0.05


@dataclass(frozen=True)
class RadiusEstimate:
    """Disk radius for a target count, with the inputs that produced it."""

    r: float
    surface_area: float
    decay: float
    m: int
    edge_length: float
    n: int


@dataclass
class RefinementState:
    """Where the count-refinement loop ended up."""

    r: float
    count_error: float     # 1 - |output| / n after the last sampling pass
    iterations: int
    converged: bool
    history: list = field(default_factory=list)  # (radius, count) per pass
    theta1: float = THETA_1
    theta2: float = THETA_2


def estimate_area_bbox(bbox):
    """Legacy area baseline: half the bounding-box surface, l*h + w*h + l*w."""
    l, w, h = bbox.extents
    return float(l * h + w * h + l * w)


def estimate_area_voxel(grid):
    """Voxel-based area estimate: one face per occupied voxel, m * edge^2."""
    return grid.m * grid.edge_length**2


def estimate_radius(grid, n, decay=DEFAULT_DECAY):
    """Disk radius giving ~n samples on the voxel-estimated surface.

    r = edge * sqrt(m / (decay * n * pi)). Larger targets shrink the
    radius; more occupied voxels (more surface) grow it.
    """
    if n < 1:
        raise ResampleError("target count must be positive")
    if decay <= 0:
        raise ResampleError("decay factor must be positive")
    r = grid.edge_length * math.sqrt(grid.m / (decay * n * math.pi))
    return RadiusEstimate(
        r=r,
        surface_area=estimate_area_voxel(grid),
        decay=decay,
        m=grid.m,
        edge_length=grid.edge_length,
        n=n,
    )


def _as_radii(radius_of, n):
    if callable(radius_of):
        radii = np.asarray([radius_of(i) for i in range(n)], dtype=np.float64)
    else:
        radii = np.broadcast_to(
            np.asarray(radius_of, dtype=np.float64), (n,)
        ).copy()
    if radii.shape != (n,):
        raise ResampleError("need one radius per point")
    if not (np.isfinite(radii).all() and (radii > 0).all()):
        raise ResampleError("radii must be positive and finite")
    return radii


def _grid_arrays(pts, h):
    lo = pts.min(axis=0)
    cell = np.floor((pts - lo) / h).astype(np.int64)
    ncell = cell.max(axis=0) + 1
    keys = (cell[:, 0] * ncell[1] + cell[:, 1]) * ncell[2] + cell[:, 2]
    order = np.argsort(keys, kind="stable").astype(np.int64)
    sk = keys[order]
    first = np.empty(sk.shape[0], dtype=bool)
    first[0] = True
    np.not_equal(sk[1:], sk[:-1], out=first[1:])
    starts_idx = np.flatnonzero(first)
    uniq = sk[starts_idx]
    starts = np.append(starts_idx, sk.shape[0]).astype(np.int64)
    return cell, ncell, uniq, starts, order


def _sample_indices(pts, radii, perm):
    """Dart throwing; returns accepted indices in visiting order."""
    cell, ncell, uniq, starts, order = _grid_arrays(pts, float(radii.max()))
    return _kernels.dart_throw(perm, pts, radii, cell, ncell, uniq, starts, order)


def poisson_disk_subsample(cloud, radius_of, seed=0):
    """Select a Poisson-disk subset of the input points.

    ``radius_of`` is a scalar, an (n,) array, or a callable giving each
    point's exclusion radius. Any two selected points p, q satisfy
    dist(p, q) >= min(r_p, r_q); every rejected point was strictly within
    the exclusion distance of a point accepted before it. The visiting
    order is a seeded uniform random permutation, so identical
    (cloud, radii, seed) reproduce the identical subset. Point order of
    the input is preserved in the output.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    radii = _as_radii(radius_of, pts.shape[0])
    perm = np.random.default_rng(seed).permutation(pts.shape[0]).astype(np.int64)
    idx = np.sort(_sample_indices(pts, radii, perm))
    if isinstance(cloud, PointCloud):
        return cloud.take(idx)
    return PointCloud(points=pts[idx])


def _next_radius(r, count, n):
    """One radius update from the current count, or None inside the band."""
    err = 1.0 - count / n
    if count < n:
        return r * (1.0 - err / THETA_1)
    if count > (1.0 + COUNT_TOLERANCE) * n:
        mu = (count - n) / 2.0
        return r * (1.0 - err / (THETA_2 + mu))
    return None


def refine_count(cloud, n, estimate, seed=0, max_iters=50, radius_scale=None):
    """Iterate sampling passes until the subset count lands in [n, 1.05n].

    Each pass reruns dart throwing on the ORIGINAL cloud with the current
    radius (one fixed seeded permutation). Too few points shrink the
    radius sharply; more than 5% excess grows it gently. ``radius_scale``,
    when given, is a per-point multiplier (edge points use 0.5) applied on
    top of the scalar radius so mixed densities refine together.

    Returns (subset, RefinementState). Raises ConvergenceError carrying the
    closest-count subset if the band is not reached within ``max_iters``.
    """
    if n < 1:
        raise ResampleError("target count must be positive")
    if n > len(cloud):
        raise ResampleError("target exceeds input size")
    pts = cloud.points
    scale = (
        np.ones(len(cloud), dtype=np.float64)
        if radius_scale is None
        else _as_radii(radius_scale, len(cloud))
    )
    perm = np.random.default_rng(seed).permutation(len(cloud)).astype(np.int64)

    r = estimate.r
    history = []
    best_idx = None
    best_gap = None
    count = 0
    for it in range(1, max_iters + 1):
        idx = _sample_indices(pts, r * scale, perm)
        count = idx.shape[0]
        history.append((r, count))
        gap = abs(count - n)
        if best_gap is None or gap < best_gap:
            best_gap, best_idx = gap, idx
        r_next = _next_radius(r, count, n)
        if r_next is None:
            state = RefinementState(
                r=r,
                count_error=1.0 - count / n,
                iterations=it,
                converged=True,
                history=history,
            )
            return cloud.take(np.sort(idx)), state
        r = r_next

    state = RefinementState(
        r=r,
        count_error=1.0 - count / n,
        iterations=max_iters,
        converged=False,
        history=history,
    )
    raise ConvergenceError(
        f"count refinement did not reach [{n}, {math.ceil((1 + COUNT_TOLERANCE) * n)}] "
        f"within {max_iters} iterations (closest count: {best_idx.shape[0]})",
        best_cloud=cloud.take(np.sort(best_idx)),
        state=state,
    )
