"""End-to-end resampling: voxel radius estimate, refinement, trim, smooth.

The stages follow one fixed order: classify (optional) -> voxelize ->
radius estimate -> count refinement -> exact-count trim -> smoothing.
Identical input, configuration, and seed reproduce identical output
positions regardless of thread count.
"""

import os
import time

import numpy as np

from .cloud import compute_bbox, default_voxel_length, voxelize
from .config import FEATURE_DETECT, FEATURE_LABELS, ResampleConfig, RunReport
from .errors import ResampleError
from .features import assign_radii, detect_edges_covariance, load_labels
from .poisson import estimate_radius, refine_count
from .smoothing import smooth, trim_to_exact_count


def thread_count():
    """Worker count for internal parallelism (PCRESAMPLE_THREADS overrides).

    Only speed may depend on this; output bytes never do.
    """
    env = os.environ.get("PCRESAMPLE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ResampleError(f"PCRESAMPLE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def resample(cloud, config: ResampleConfig):
    """Resample ``cloud`` to exactly config.n points; returns (cloud, report).

    Raises ConvergenceError (carrying the closest subset) if count
    refinement cannot reach the [n, 1.05n] band; everything after that
    point is deterministic trimming and smoothing.
    """
    if config.n > len(cloud):
        raise ResampleError("target exceeds input size")
    workers = thread_count()
    times = {}
    t0 = time.perf_counter()

    classes = None
    sharp_info = None
    if config.feature_mode.enabled:
        fm = config.feature_mode
        if fm.kind == FEATURE_LABELS:
            classification = load_labels(fm.labels_path, expected_count=len(cloud))
        else:
            classification = detect_edges_covariance(
                cloud, k=fm.k, tau=fm.tau, workers=workers
            )
        classes = classification.classes
        cloud = attach_classes(cloud, classes)
        sharp_info = {
            "source": classification.source,
            "edge_points": int((classes == 1).sum()),
            "radius_ratio": 0.5,
        }
    times["classify"] = time.perf_counter() - t0

    t = time.perf_counter()
    bbox = compute_bbox(cloud)
    edge_length = default_voxel_length(bbox, factor=config.voxel_factor)
    grid = voxelize(cloud, edge_length)
    times["voxelize"] = time.perf_counter() - t

    t = time.perf_counter()
    estimate = estimate_radius(grid, config.n, decay=config.decay)
    radius_scale = None
    if classes is not None:
        # refinement rescales the scalar radius; edge points stay at half
        radius_scale = assign_radii(classes, 1.0)
    subset, state = refine_count(
        cloud,
        config.n,
        estimate,
        seed=config.seed,
        max_iters=config.max_refine_iters,
        radius_scale=radius_scale,
    )
    times["refine"] = time.perf_counter() - t

    t = time.perf_counter()
    exact = trim_to_exact_count(subset, config.n)
    times["trim"] = time.perf_counter() - t

    t = time.perf_counter()
    smoothed = smooth(
        exact,
        k=config.k_smooth,
        iterations=config.smooth_iterations,
        classes=exact.classes,
        snap_back=config.snap_back,
        snap_reference=cloud,
        workers=workers,
    )
    times["smooth"] = time.perf_counter() - t
    times["total"] = time.perf_counter() - t0

    report = RunReport(
        input_count=len(cloud),
        output_count=len(smoothed),
        final_radius=state.r,
        refinement_iterations=state.iterations,
        converged=state.converged,
        stage_seconds=times,
        config=config.to_dict(),
        seed=config.seed,
        sharp=sharp_info,
    )
    return smoothed, report


def attach_classes(cloud, classes):
    """Cloud with a classes column replaced/added (positions untouched)."""
    from .cloud import PointCloud

    return PointCloud(
        points=cloud.points,
        normals=cloud.normals,
        colors=cloud.colors,
        classes=classes,
    )
