"""Probe: initial-count behavior and refinement convergence per shape."""
import time
import numpy as np
from pcresample.cloud import PointCloud, compute_bbox, default_voxel_length, voxelize
from pcresample.poisson import estimate_radius, refine_count
from pcresample.errors import ConvergenceError


def rot(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3))
    q, _ = np.linalg.qr(a)
    return q


def plane(n, seed, tilt=False):
    rng = np.random.default_rng(seed)
    pts = np.zeros((n, 3))
    pts[:, :2] = rng.uniform(0, 10, size=(n, 2))
    pts[:, 2] = rng.uniform(0, 0.001, size=n)
    if tilt:
        pts = pts @ rot(seed + 1).T
    return pts


def sphere(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * 5.0


def torus(n, seed, R=4.0, r=1.5):
    rng = np.random.default_rng(seed)
    # rejection sample for uniform area density
    pts = []
    need = n
    while need > 0:
        u = rng.uniform(0, 2 * np.pi, size=2 * need)
        v = rng.uniform(0, 2 * np.pi, size=2 * need)
        keep = rng.uniform(size=2 * need) < (R + r * np.cos(v)) / (R + r)
        u, v = u[keep][:need], v[keep][:need]
        x = (R + r * np.cos(v)) * np.cos(u)
        y = (R + r * np.cos(v)) * np.sin(u)
        z = r * np.sin(v)
        pts.append(np.column_stack([x, y, z]))
        need = n - sum(p.shape[0] for p in pts)
    return np.vstack(pts)[:n]


def box_shell(n, seed, tilt=False):
    rng = np.random.default_rng(seed)
    ext = np.array([4.0, 3.0, 2.0])
    areas = np.array([ext[1] * ext[2], ext[1] * ext[2], ext[0] * ext[2],
                      ext[0] * ext[2], ext[0] * ext[1], ext[0] * ext[1]])
    face = rng.choice(6, size=n, p=areas / areas.sum())
    uv = rng.uniform(size=(n, 2))
    pts = np.empty((n, 3))
    for f in range(6):
        mask = face == f
        axis = f // 2
        side = f % 2
        others = [a for a in range(3) if a != axis]
        pts[mask, axis] = side * ext[axis]
        pts[mask, others[0]] = uv[mask, 0] * ext[others[0]]
        pts[mask, others[1]] = uv[mask, 1] * ext[others[1]]
    if tilt:
        pts = pts @ rot(seed + 1).T
    return pts


def dihedral(n, seed, tilt=False):
    rng = np.random.default_rng(seed)
    half = n // 2
    a = np.zeros((half, 3))
    a[:, 0] = rng.uniform(0, 4, half)
    a[:, 1] = rng.uniform(0, 4, half)
    b = np.zeros((n - half, 3))
    b[:, 0] = rng.uniform(0, 4, n - half)
    b[:, 2] = rng.uniform(0, 4, n - half)
    pts = np.vstack([a, b])
    if tilt:
        pts = pts @ rot(seed + 1).T
    return pts


def run(name, pts, n):
    cloud = PointCloud(points=pts)
    bbox = compute_bbox(cloud)
    lv = default_voxel_length(bbox)
    grid = voxelize(cloud, lv)
    est = estimate_radius(grid, n)
    t0 = time.perf_counter()
    try:
        out, state = refine_count(cloud, n, est, seed=7)
        dt = time.perf_counter() - t0
        c0 = state.history[0][1]
        print(f"{name:28s} |P|={len(cloud):7d} n={n:6d} init={c0/n:6.3f}n "
              f"iters={state.iterations:3d} final={len(out):6d} ({len(out)/n:5.3f}n) {dt:5.1f}s")
    except ConvergenceError as e:
        dt = time.perf_counter() - t0
        h = e.state.history
        print(f"{name:28s} |P|={len(cloud):7d} n={n:6d} init={h[0][1]/n:6.3f}n "
              f"FAILED after {len(h)} iters, last count {h[-1][1]} ({h[-1][1]/n:5.3f}n) {dt:5.1f}s")


if __name__ == "__main__":
    # worst case: dense axis-aligned plane
    run("plane-axis 500k", plane(500_000, 1), 20_000)
    run("plane-tilt 500k", plane(500_000, 1, tilt=True), 20_000)
    run("plane-tilt 100k", plane(100_000, 2, tilt=True), 5_000)
    run("plane-tilt 60k", plane(60_000, 3, tilt=True), 1_000)
    for n in (1_000, 5_000, 20_000):
        run(f"sphere 200k", sphere(200_000, 4), n)
    run("sphere 60k", sphere(60_000, 5), 5_000)
    run("torus 150k", torus(150_000, 6), 5_000)
    run("torus 400k", torus(400_000, 7), 20_000)
    run("boxshell-axis 200k", box_shell(200_000, 8), 5_000)
    run("boxshell-tilt 200k", box_shell(200_000, 8, tilt=True), 5_000)
    run("boxshell-tilt 300k", box_shell(300_000, 9, tilt=True), 20_000)
    run("dihedral-axis 100k", dihedral(100_000, 10), 5_000)
    run("dihedral-tilt 100k", dihedral(100_000, 10, tilt=True), 5_000)
    run("dihedral-tilt 80k", dihedral(80_000, 11, tilt=True), 1_000)
