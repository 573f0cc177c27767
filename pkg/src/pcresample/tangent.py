"""Tangent-plane machinery for one neighborhood at a time.

A point's k nearest neighbors are projected onto the plane through the
point orthogonal to its estimated normal. In that plane the point's
Voronoi cell (among its projected neighbors) either closes around it or
does not; closed cells yield cotangent weights and a weighted-centroid
displacement. The batch smoothing passes reuse the identical compiled
solver, so these per-neighborhood operations double as its reference.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateGeometryError, ResampleError

_FRAME_TOL = 1e-9


def _neighborhood_covariance(pts):
    centered = pts - pts.mean(axis=0)
    return centered.T @ centered / pts.shape[0]


def _sign_rule(v):
    # deterministic orientation: positive z, then y, then x
    for c in (2, 1, 0):
        if v[c] > 0.0:
            return v
        if v[c] < 0.0:
            return -v
    return v


def estimate_normal(points):
    """Unit normal of a neighborhood: smallest-variance covariance direction.

    The sign is fixed deterministically (positive z component, ties broken
    by y then x). Requires at least 3 points that are not collinear.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] < 3:
        raise DegenerateGeometryError("degenerate neighborhood")
    cov = _neighborhood_covariance(pts)
    evals, evecs = np.linalg.eigh(cov)
    if evals[2] <= 0.0 or evals[1] <= 1e-12 * evals[2]:
        raise DegenerateGeometryError("degenerate neighborhood")
    return _sign_rule(evecs[:, 0].copy())


def make_frame(origin, normal):
    """Orthonormal tangent frame at ``origin`` for a given unit normal.

    e1 is built from the world axis least aligned with the normal, so the
    frame is deterministic; the displacement result itself depends only on
    the plane, not on this choice.
    """
    normal = np.asarray(normal, dtype=np.float64).reshape(3)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(normal))] = 1.0
    e1 = np.cross(axis, normal)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return LocalFrame(origin=np.asarray(origin, float).reshape(3), normal=normal, e1=e1, e2=e2)


@dataclass(frozen=True)
class LocalFrame:
    """Origin plus a right-handed orthonormal basis (e1, e2, normal)."""

    origin: np.ndarray
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        for name in ("origin", "normal", "e1", "e2"):
            v = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if v.shape != (3,):
                raise ResampleError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)
        g = np.array([self.e1, self.e2, self.normal])
        if not np.allclose(g @ g.T, np.eye(3), atol=_FRAME_TOL):
            raise ResampleError("frame axes are not orthonormal")


@dataclass(frozen=True)
class TangentNeighborhood:
    """A center point's projected neighborhood and its local cell structure.

    ``neighbors2d`` are the (k, 2) tangent coordinates (the center itself
    maps to the origin). ``cell_closed`` is true iff the center lies
    strictly inside the convex hull of the projected neighbors. ``star``
    lists, in ring order, the positions (into ``neighbors2d``) of the
    neighbors whose bisectors bound the center's Voronoi cell; it is empty
    when the cell is not closed.
    """

    frame: LocalFrame
    neighbors2d: np.ndarray
    neighbor_ids: np.ndarray
    cell_closed: bool
    star: np.ndarray
    cell_area: float
    cell_centroid: np.ndarray = None
    cell_within_neighborhood: bool = False
    _raw_weights: np.ndarray = None

    @property
    def center2d(self):
        return np.zeros(2)


@dataclass(frozen=True)
class CotangentWeights:
    """Per-star-neighbor weights w_ij (ring order) and their sum w_i."""

    w_ij: np.ndarray
    w_i: float


def project_to_tangent(center, neighbors, frame, neighbor_ids=None):
    """Project neighbors into the frame's tangent plane and solve the cell.

    Neighbor q maps to ((q - origin)·e1, (q - origin)·e2). Requires at
    least 3 neighbors whose projections actually span the plane.
    """
    nb = np.asarray(neighbors, dtype=np.float64).reshape(-1, 3)
    if nb.shape[0] < 3:
        raise DegenerateGeometryError("degenerate projection")
    center = np.asarray(center, dtype=np.float64).reshape(3)
    if not np.array_equal(center, frame.origin):
        raise ResampleError("frame origin must be the center point")
    d = nb - frame.origin
    loc = np.column_stack([d @ frame.e1, d @ frame.e2])
    spread = loc - loc.mean(axis=0)
    sv = np.linalg.svd(spread, compute_uv=False)
    if sv[1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateGeometryError("degenerate projection")
    if neighbor_ids is None:
        neighbor_ids = np.arange(nb.shape[0], dtype=np.int64)
    closed = _kernels._hull_interior(loc) == 1
    status, trusted, u, v, area, star, weights = _kernels._cell_solve(loc)
    ok = status == _kernels.CELL_OK
    return TangentNeighborhood(
        frame=frame,
        neighbors2d=loc,
        neighbor_ids=np.asarray(neighbor_ids, dtype=np.int64),
        cell_closed=bool(closed),
        star=star if ok else np.empty(0, np.int64),
        cell_area=float(area) if ok else 0.0,
        cell_centroid=np.array([u, v]) if ok else None,
        cell_within_neighborhood=bool(trusted) if ok else False,
        _raw_weights=weights if ok else None,
    )


def cotangent_weights(tn):
    """Cotangent weights of the center's star edges, clamped to >= 0.

    For star edge (center, q_t) the two flanking star triangles contribute
    (cot a + cot b) / 2, where a and b sit at the neighbors before and
    after q_t in the ring. If every weight clamps to zero the weights fall
    back to uniform, keeping the later displacement a convex combination.
    """
    if not tn.cell_closed:
        raise ResampleError("boundary point, no weights")
    if tn._raw_weights is None or tn.star.size == 0:
        raise DegenerateGeometryError("degenerate neighborhood")
    w = tn._raw_weights.copy()
    return CotangentWeights(w_ij=w, w_i=float(w.sum()))


def displace(tn, weights=None):
    """Central displacement: move the center to its cell's area centroid.

    Evaluated in the 2D tangent plane and lifted through the frame, so the
    point stays on its tangent plane and inside its own (convex, closed)
    Voronoi cell. This is one local centroidal-Voronoi step; iterating it
    drives the neighborhood toward isotropic spacing. The cell structure
    already encodes the clamped star weights (``weights`` is accepted for
    the weights-then-displace call shape and checked for validity only).
    """
    if not tn.cell_closed:
        raise ResampleError("boundary point, no weights")
    if tn.cell_centroid is None:
        raise DegenerateGeometryError("degenerate neighborhood")
    if weights is not None and np.asarray(weights.w_ij).min(initial=0.0) < 0.0:
        raise ResampleError("weights must be nonnegative")
    u, v = tn.cell_centroid
    f = tn.frame
    return f.origin + u * f.e1 + v * f.e2
