"""Edge/normal classification, dual sampling radii, and freeze predicate.

Edge labels come either from an external file (one 0/1 per line, matching
input point order) or from a classical covariance detector: the surface
variation sigma = l0 / (l0 + l1 + l2) of the k-NN covariance eigenvalues
is near zero on flat regions and elevated on creases. Edge points sample
at half the disk radius, doubling their linear density.
"""

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, PointClass
from .errors import CloudParseError, InsufficientPointsError, ResampleError
from .spatial import knn_indices

SOURCE_EXTERNAL = "external_labels"
SOURCE_DETECTOR = "covariance_detector"

_CHUNK = 65536


@dataclass(frozen=True)
class Classification:
    """Per-point classes (uint8 PointClass values) and where they came from."""

    classes: np.ndarray
    source: str

    def __post_init__(self):
        cls = np.ascontiguousarray(self.classes, dtype=np.uint8)
        if cls.ndim != 1:
            raise ResampleError("classes must be one value per point")
        object.__setattr__(self, "classes", cls)

    def __len__(self):
        return self.classes.shape[0]


@dataclass(frozen=True)
class DualRadii:
    """Normal-point radius and the halved edge-point radius."""

    r: float

    @property
    def r_e(self):
        return self.r / 2.0


def load_labels(path, expected_count):
    """Read a 0/1-per-line label file into a Classification."""
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            token = raw.strip()
            if not token:
                continue
            if token not in ("0", "1"):
                raise CloudParseError(
                    f"expected label 0 or 1, got {token!r}", path=str(path), line=lineno
                )
            labels.append(int(token))
    if len(labels) != expected_count:
        raise ResampleError(
            f"label/point count mismatch: {len(labels)} labels for "
            f"{expected_count} points"
        )
    return Classification(
        classes=np.asarray(labels, dtype=np.uint8), source=SOURCE_EXTERNAL
    )


def surface_variation(cloud, k=16, workers=1):
    """sigma = l0 / (l0 + l1 + l2) of each point's k-NN covariance."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    if k + 1 > pts.shape[0]:
        raise InsufficientPointsError("insufficient points")
    neigh, _ = knn_indices(pts, k, workers=workers)
    n = pts.shape[0]
    sigma = np.empty(n)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        group = np.concatenate([pts[lo:hi, None, :], pts[neigh[lo:hi]]], axis=1)
        centered = group - group.mean(axis=1, keepdims=True)
        cov = np.einsum("npi,npj->nij", centered, centered) / (k + 1)
        evals = np.linalg.eigvalsh(cov)
        tot = evals.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = evals[:, 0] / tot
        # fully degenerate neighborhoods (duplicated points) read as flat
        s[tot <= 0.0] = 0.0
        sigma[lo:hi] = s
    return sigma


def detect_edges_covariance(cloud, k=16, tau=0.12, workers=1):
    """Classify points as Edge wherever surface variation exceeds ``tau``."""
    sigma = surface_variation(cloud, k=k, workers=workers)
    classes = (sigma > tau).astype(np.uint8)
    return Classification(classes=classes, source=SOURCE_DETECTOR)


def assign_radii(classification, r):
    """Per-point sampling radii: r for normal points, r/2 for edge points."""
    if r <= 0:
        raise ResampleError("radius must be positive")
    classes = (
        classification.classes
        if isinstance(classification, Classification)
        else np.asarray(classification, dtype=np.uint8)
    )
    return np.where(classes == PointClass.EDGE, r / 2.0, float(r))


def edge_freeze_predicate(index, classification, neighbor_indices):
    """Freeze an edge point whose neighborhood contains any normal point."""
    classes = (
        classification.classes
        if isinstance(classification, Classification)
        else np.asarray(classification, dtype=np.uint8)
    )
    if classes[index] != PointClass.EDGE:
        return False
    neighbor_indices = np.asarray(neighbor_indices, dtype=np.int64)
    return bool((classes[neighbor_indices] == PointClass.NORMAL).any())
