"""Command-line surface: resample, metrics, detect-edges, voxel-info.

Exit codes: 0 success, 2 usage or configuration error, 3 file parse error,
4 count refinement did not converge (the best-effort cloud is written next
to the requested output with a .partial suffix).
"""

import argparse
import json
import sys

from .cloud import compute_bbox, default_voxel_length, voxelize
from .config import FEATURE_DETECT, FEATURE_LABELS, FeatureMode, ResampleConfig
from .errors import CloudParseError, ConvergenceError, ResampleError
from .features import detect_edges_covariance
from .io import read_cloud, write_cloud, write_labels
from .metrics import consistency_report, uniformity_report
from .pipeline import resample, thread_count
from .poisson import estimate_area_bbox, estimate_area_voxel

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NO_CONVERGENCE = 4


def _parse_sharp(spec):
    """--sharp labels:<path> | detect[:k,tau]"""
    if spec is None:
        return FeatureMode()
    if spec.startswith("labels:"):
        return FeatureMode(kind=FEATURE_LABELS, labels_path=spec[len("labels:"):])
    if spec == "detect":
        return FeatureMode(kind=FEATURE_DETECT)
    if spec.startswith("detect:"):
        body = spec[len("detect:"):]
        parts = body.split(",")
        if len(parts) != 2:
            raise ResampleError("--sharp detect:<k>,<tau> takes two values")
        try:
            return FeatureMode(kind=FEATURE_DETECT, k=int(parts[0]), tau=float(parts[1]))
        except ValueError:
            raise ResampleError(f"bad detect parameters {body!r}")
    raise ResampleError(
        f"unrecognized --sharp value {spec!r}; use labels:<path> or detect[:k,tau]"
    )


def _build_parser():
    p = argparse.ArgumentParser(
        prog="pcresample",
        description="Count-controlled Poisson-disk point cloud resampling "
        "with tangent smoothing.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("resample", help="resample a cloud to exactly n points")
    r.add_argument("input")
    r.add_argument("output")
    r.add_argument("--n", type=int, required=True, help="target point count")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--lambda", dest="decay", type=float, default=0.68,
                   help="disk-overlap decay factor (default 0.68)")
    r.add_argument("--voxel-factor", type=float, default=0.05,
                   help="voxel edge as a fraction of the largest bbox extent")
    r.add_argument("--k", type=int, default=16, help="smoothing neighborhood size")
    r.add_argument("--iters", type=int, default=5, help="smoothing passes")
    r.add_argument("--sharp", default=None,
                   help="labels:<path> or detect[:k,tau] to enable edge handling")
    r.add_argument("--snap-back", action="store_true",
                   help="snap displaced points to the nearest input point")
    r.add_argument("--max-refine-iters", type=int, default=50)

    m = sub.add_parser("metrics", help="consistency + uniformity report")
    m.add_argument("original")
    m.add_argument("resampled")
    m.add_argument("--symmetric", action="store_true",
                   help="symmetric Hausdorff/mean instead of resampled->original")
    m.add_argument("--k", type=int, default=6, help="uniformity neighborhood size")
    m.add_argument("--all-points", action="store_true",
                   help="include boundary points in the local density spread")

    d = sub.add_parser("detect-edges", help="write a 0/1 label file")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--k", type=int, default=16)
    d.add_argument("--tau", type=float, default=0.12)

    v = sub.add_parser("voxel-info", help="bounding box and voxel-grid summary")
    v.add_argument("input")
    v.add_argument("--voxel-factor", type=float, default=0.05)
    return p


def _cmd_resample(args):
    cloud = read_cloud(args.input)
    config = ResampleConfig(
        n=args.n,
        decay=args.decay,
        voxel_factor=args.voxel_factor,
        k_smooth=args.k,
        smooth_iterations=args.iters,
        feature_mode=_parse_sharp(args.sharp),
        seed=args.seed,
        snap_back=args.snap_back,
        max_refine_iters=args.max_refine_iters,
    )
    import os

    try:
        out, report = resample(cloud, config)
    except ConvergenceError as exc:
        if exc.best_cloud is not None:
            ext = os.path.splitext(args.output)[1].lower()
            fmt = {".ply": "ply", ".xyz": "xyz"}.get(ext, "ply")
            write_cloud(exc.best_cloud, args.output + ".partial", format=fmt)
        print(f"pcresample: {exc}", file=sys.stderr)
        if exc.best_cloud is not None:
            print(
                f"pcresample: best-effort cloud written to {args.output}.partial",
                file=sys.stderr,
            )
        return EXIT_NO_CONVERGENCE
    write_cloud(out, args.output)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_metrics(args):
    original = read_cloud(args.original)
    resampled = read_cloud(args.resampled)
    workers = thread_count()
    report = {
        "consistency": consistency_report(
            resampled, original, symmetric=args.symmetric, workers=workers
        ).to_dict(),
        "uniformity": uniformity_report(
            resampled, k=args.k, interior_only=not args.all_points, workers=workers
        ).to_dict(),
        "original_count": len(original),
        "resampled_count": len(resampled),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_detect_edges(args):
    cloud = read_cloud(args.input)
    classification = detect_edges_covariance(
        cloud, k=args.k, tau=args.tau, workers=thread_count()
    )
    write_labels(classification, args.output)
    print(
        json.dumps(
            {
                "points": len(cloud),
                "edge_points": int((classification.classes == 1).sum()),
                "k": args.k,
                "tau": args.tau,
                "output": args.output,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_voxel_info(args):
    cloud = read_cloud(args.input)
    bbox = compute_bbox(cloud)
    edge = default_voxel_length(bbox, factor=args.voxel_factor)
    grid = voxelize(cloud, edge)
    print(
        json.dumps(
            {
                "points": len(cloud),
                "bbox_min": bbox.min.tolist(),
                "bbox_max": bbox.max.tolist(),
                "extents": bbox.extents.tolist(),
                "voxel_edge": edge,
                "occupied_voxels": grid.m,
                "area_voxel_estimate": estimate_area_voxel(grid),
                "area_bbox_estimate": estimate_area_bbox(bbox),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "resample": _cmd_resample,
        "metrics": _cmd_metrics,
        "detect-edges": _cmd_detect_edges,
        "voxel-info": _cmd_voxel_info,
    }
    try:
        return handlers[args.command](args)
    except CloudParseError as exc:
        print(f"pcresample: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ResampleError, OSError) as exc:
        print(f"pcresample: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
