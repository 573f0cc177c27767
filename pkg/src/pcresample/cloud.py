"""Core geometric records: point clouds, bounding boxes, and voxel grids.

Positions are float64 arrays of shape (n, 3) in whatever units the input
uses; nothing here assumes a particular scale. All record types are frozen
after construction (the backing arrays are marked read-only), so instances
can be shared freely between threads.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import DegenerateGeometryError, EmptyCloudError, ResampleError


class PointClass(IntEnum):
    """Per-point category: ordinary surface point or sharp-feature point."""

    NORMAL = 0
    EDGE = 1


def _freeze(a):
    a.flags.writeable = False
    return a


def _as_positions(points):
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ResampleError(f"expected (n, 3) positions, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise EmptyCloudError("empty input")
    if not np.isfinite(pts).all():
        raise ResampleError("positions contain NaN or infinity")
    return pts


@dataclass(frozen=True)
class PointCloud:
    """Positions plus optional parallel attributes.

    ``normals`` is (n, 3) float64, ``colors`` (n, 3) uint8, ``classes`` (n,)
    uint8 holding PointClass values. Attribute arrays, when present, must
    match the point count; they travel with their points through subsetting.
    """

    points: np.ndarray
    normals: np.ndarray | None = None
    colors: np.ndarray | None = None
    classes: np.ndarray | None = None

    def __post_init__(self):
        pts = _freeze(_as_positions(self.points))
        object.__setattr__(self, "points", pts)
        n = pts.shape[0]
        if self.normals is not None:
            nrm = np.ascontiguousarray(self.normals, dtype=np.float64)
            if nrm.shape != (n, 3):
                raise ResampleError("normals length does not match point count")
            if not np.isfinite(nrm).all():
                raise ResampleError("normals contain NaN or infinity")
            object.__setattr__(self, "normals", _freeze(nrm))
        if self.colors is not None:
            col = np.ascontiguousarray(self.colors, dtype=np.uint8)
            if col.shape != (n, 3):
                raise ResampleError("colors length does not match point count")
            object.__setattr__(self, "colors", _freeze(col))
        if self.classes is not None:
            cls = np.ascontiguousarray(self.classes, dtype=np.uint8)
            if cls.shape != (n,):
                raise ResampleError("classes length does not match point count")
            if cls.max(initial=0) > 1:
                raise ResampleError("classes must be 0 (normal) or 1 (edge)")
            object.__setattr__(self, "classes", _freeze(cls))

    def __len__(self):
        return self.points.shape[0]

    def take(self, indices):
        """Subset by point index, carrying every attribute along."""
        idx = np.asarray(indices, dtype=np.int64)
        return PointCloud(
            points=self.points[idx],
            normals=None if self.normals is None else self.normals[idx],
            colors=None if self.colors is None else self.colors[idx],
            classes=None if self.classes is None else self.classes[idx],
        )

    def with_points(self, new_points):
        """Same attributes, new positions (used after displacement passes)."""
        return PointCloud(
            points=new_points,
            normals=self.normals,
            colors=self.colors,
            classes=self.classes,
        )


@dataclass(frozen=True)
class BoundingBox:
    """Tight axis-aligned bound; ``min`` and ``max`` are (3,) float64."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = _freeze(np.ascontiguousarray(self.min, dtype=np.float64))
        hi = _freeze(np.ascontiguousarray(self.max, dtype=np.float64))
        if lo.shape != (3,) or hi.shape != (3,):
            raise ResampleError("bounding box corners must be 3-vectors")
        if (lo > hi).any():
            raise ResampleError("bounding box min exceeds max")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def extents(self):
        """Edge lengths (length, width, height) of the box."""
        return self.max - self.min


@dataclass(frozen=True)
class VoxelGrid:
    """Occupied-voxel set over a cloud's bounding box.

    ``occupied`` is an (m, 3) int64 array of distinct voxel indices in
    lexicographic order; ``cells_per_axis`` is the valid index range
    (indices run 0 .. cells_per_axis - 1 on each axis).
    """

    edge_length: float
    origin: np.ndarray
    occupied: np.ndarray
    cells_per_axis: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.edge_length <= 0:
            raise ResampleError("invalid voxel length")
        object.__setattr__(
            self, "origin", _freeze(np.ascontiguousarray(self.origin, dtype=np.float64))
        )
        occ = np.ascontiguousarray(self.occupied, dtype=np.int64)
        if occ.ndim != 2 or occ.shape[1] != 3:
            raise ResampleError("occupied voxel indices must be (m, 3)")
        object.__setattr__(self, "occupied", _freeze(occ))
        if self.cells_per_axis is None:
            cells = occ.max(axis=0) + 1
        else:
            cells = np.ascontiguousarray(self.cells_per_axis, dtype=np.int64)
        object.__setattr__(self, "cells_per_axis", _freeze(cells))

    @property
    def m(self):
        """Number of occupied voxels."""
        return self.occupied.shape[0]

    def occupied_set(self):
        """Occupied indices as a set of (i, j, k) tuples."""
        return {tuple(v) for v in self.occupied.tolist()}


def compute_bbox(cloud):
    """Tight axis-aligned bounding box of a cloud (or raw (n, 3) array)."""
    pts = cloud.points if isinstance(cloud, PointCloud) else _as_positions(cloud)
    return BoundingBox(min=pts.min(axis=0), max=pts.max(axis=0))


def default_voxel_length(bbox, factor=0.05):
    """Default voxel edge: ``factor`` times the largest box extent.

    Raises on an all-zero box (a single point, or exact duplicates), where
    no length scale exists.
    """
    largest = float(bbox.extents.max())
    if largest <= 0.0:
        raise DegenerateGeometryError("degenerate bounding box")
    return factor * largest


def voxelize(cloud, edge_length):
    """Bin points into cubes of the given edge length anchored at bbox.min.

    A point's index on each axis is floor((coord - origin) / edge_length);
    a boundary point belongs to the higher-index cell except at the global
    max corner, where the index is clamped back into range. The result is
    independent of point order.
    """
    if edge_length <= 0:
        raise ResampleError("invalid voxel length")
    pts = cloud.points if isinstance(cloud, PointCloud) else _as_positions(cloud)
    bbox = compute_bbox(pts)
    cells = np.floor(bbox.extents / edge_length).astype(np.int64) + 1
    idx = np.floor((pts - bbox.min) / edge_length).astype(np.int64)
    np.minimum(idx, cells - 1, out=idx)
    if (idx < 0).any():
        raise ResampleError("voxel index out of range")
    occupied = np.unique(idx, axis=0)
    return VoxelGrid(
        edge_length=float(edge_length),
        origin=bbox.min,
        occupied=occupied,
        cells_per_axis=cells,
    )
