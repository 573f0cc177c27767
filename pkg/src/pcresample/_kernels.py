"""Compiled inner loops: dart throwing and local Voronoi-cell geometry.

Everything here is numba-jitted and deliberately free of Python objects.
The cell solver works in the 2D tangent plane of one point: neighbors are
given as (k, 2) offsets from the center, which sits at the origin.
"""

import math

import numpy as np
import numba
from numba import njit, prange

# workqueue never probes TBB/OMP, and per-slot writes make results
# independent of the layer anyway
numba.config.THREADING_LAYER = "workqueue"

# status codes from _cell_solve
CELL_OK = 0          # closed cell, weights and centroid valid
CELL_UNCLOSED = 1    # center not strictly inside the neighbors' hull
CELL_DEGENERATE = 2  # coincident neighbor, collapsed polygon, guard overflow


@njit(cache=True)
def _hull_interior(loc):
    """Center strictly inside the convex hull of the 2D neighbor set.

    Equivalent test: the largest angular gap between neighbor directions is
    strictly below pi. A neighbor coinciding with the center makes the
    configuration degenerate (returns -1; 1 means inside, 0 outside).
    """
    k = loc.shape[0]
    ang = np.empty(k, np.float64)
    for t in range(k):
        x = loc[t, 0]
        y = loc[t, 1]
        if x == 0.0 and y == 0.0:
            return -1
        ang[t] = math.atan2(y, x)
    ang.sort()
    gap = ang[0] + 2.0 * math.pi - ang[k - 1]
    for t in range(1, k):
        g = ang[t] - ang[t - 1]
        if g > gap:
            gap = g
    if gap < math.pi:
        return 1
    return 0


@njit(cache=True)
def _cell_solve(loc):
    """Voronoi cell of the origin among ``loc`` + origin, plus Eq-style weights.

    Clips a large guard square by the perpendicular bisectors between the
    origin and each neighbor, tracking which neighbor contributed each cell
    edge. The surviving edges, in ring order, identify the center's Delaunay
    star; the center angles flanking each star edge give its cotangent
    weight (clamped to zero, uniform fallback when the whole cell clamps
    away, as in the exact-square configuration).

    Returns (status, trusted, u, v, area, star_labels, star_weights) where
    (u, v) is the area centroid of the cell, the displacement target, and
    ``area`` the cell area. ``trusted`` reports whether every cell vertex
    lies within half the farthest-neighbor distance: inside that disk no
    point beyond the supplied neighbors could have cut the cell, so the
    local cell provably equals the full one; farther-reaching cells are
    only as good as the neighborhood that produced them.
    """
    k = loc.shape[0]
    no_lab = np.empty(0, np.int64)
    no_w = np.empty(0, np.float64)

    inside = _hull_interior(loc)
    if inside == -1:
        return CELL_DEGENERATE, False, 0.0, 0.0, 0.0, no_lab, no_w
    if inside == 0:
        return CELL_UNCLOSED, False, 0.0, 0.0, 0.0, no_lab, no_w

    scale = 0.0
    for t in range(k):
        ax = abs(loc[t, 0])
        ay = abs(loc[t, 1])
        if ax > scale:
            scale = ax
        if ay > scale:
            scale = ay
    guard = 1e4 * scale

    # ring entries: vertex, label of the edge leaving it, and that edge's
    # supporting line (ax, ay, b). Crossings are solved from line pairs, so
    # vertex accuracy is set by the bisector coefficients, not by how far
    # away the guard square sits.
    cap = k + 8
    vx = np.empty(cap, np.float64)
    vy = np.empty(cap, np.float64)
    vl = np.empty(cap, np.int64)
    vlin = np.empty((cap, 3), np.float64)
    wx = np.empty(cap, np.float64)
    wy = np.empty(cap, np.float64)
    wl = np.empty(cap, np.int64)
    wlin = np.empty((cap, 3), np.float64)

    # guard square, counterclockwise; -1 labels its edges
    vx[0] = -guard; vy[0] = -guard
    vx[1] = guard;  vy[1] = -guard
    vx[2] = guard;  vy[2] = guard
    vx[3] = -guard; vy[3] = guard
    vlin[0, 0] = 0.0;  vlin[0, 1] = -1.0; vlin[0, 2] = guard
    vlin[1, 0] = 1.0;  vlin[1, 1] = 0.0;  vlin[1, 2] = guard
    vlin[2, 0] = 0.0;  vlin[2, 1] = 1.0;  vlin[2, 2] = guard
    vlin[3, 0] = -1.0; vlin[3, 1] = 0.0;  vlin[3, 2] = guard
    for t in range(4):
        vl[t] = -1
    nv = 4

    for j in range(k):
        ax = loc[j, 0]
        ay = loc[j, 1]
        b = 0.5 * (ax * ax + ay * ay)
        nw = 0
        for t in range(nv):
            t2 = t + 1
            if t2 == nv:
                t2 = 0
            din = ax * vx[t] + ay * vy[t] - b
            dout = ax * vx[t2] + ay * vy[t2] - b
            if din <= 0.0:
                if dout <= 0.0:
                    wx[nw] = vx[t2]; wy[nw] = vy[t2]; wl[nw] = vl[t2]
                    wlin[nw, 0] = vlin[t2, 0]; wlin[nw, 1] = vlin[t2, 1]; wlin[nw, 2] = vlin[t2, 2]
                    nw += 1
                else:
                    det = vlin[t, 0] * ay - vlin[t, 1] * ax
                    if abs(det) > 0.0:
                        wx[nw] = (vlin[t, 2] * ay - b * vlin[t, 1]) / det
                        wy[nw] = (vlin[t, 0] * b - ax * vlin[t, 2]) / det
                    else:
                        s = din / (din - dout)
                        wx[nw] = vx[t] + s * (vx[t2] - vx[t])
                        wy[nw] = vy[t] + s * (vy[t2] - vy[t])
                    wl[nw] = j
                    wlin[nw, 0] = ax; wlin[nw, 1] = ay; wlin[nw, 2] = b
                    nw += 1
            elif dout <= 0.0:
                det = vlin[t, 0] * ay - vlin[t, 1] * ax
                if abs(det) > 0.0:
                    wx[nw] = (vlin[t, 2] * ay - b * vlin[t, 1]) / det
                    wy[nw] = (vlin[t, 0] * b - ax * vlin[t, 2]) / det
                else:
                    s = din / (din - dout)
                    wx[nw] = vx[t] + s * (vx[t2] - vx[t])
                    wy[nw] = vy[t] + s * (vy[t2] - vy[t])
                wl[nw] = vl[t]
                wlin[nw, 0] = vlin[t, 0]; wlin[nw, 1] = vlin[t, 1]; wlin[nw, 2] = vlin[t, 2]
                nw += 1
                wx[nw] = vx[t2]; wy[nw] = vy[t2]; wl[nw] = vl[t2]
                wlin[nw, 0] = vlin[t2, 0]; wlin[nw, 1] = vlin[t2, 1]; wlin[nw, 2] = vlin[t2, 2]
                nw += 1
        if nw < 3:
            return CELL_DEGENERATE, False, 0.0, 0.0, 0.0, no_lab, no_w
        for t in range(nw):
            vx[t] = wx[t]; vy[t] = wy[t]; vl[t] = wl[t]
            vlin[t, 0] = wlin[t, 0]; vlin[t, 1] = wlin[t, 1]; vlin[t, 2] = wlin[t, 2]
        nv = nw

    # drop zero-length edges (entry t owns the edge to entry t+1)
    eps = 1e-12 * scale
    m = 0
    for t in range(nv):
        t2 = t + 1
        if t2 == nv:
            t2 = 0
        if abs(vx[t] - vx[t2]) > eps or abs(vy[t] - vy[t2]) > eps:
            wx[m] = vx[t]; wy[m] = vy[t]; wl[m] = vl[t]; m += 1
    if m < 3:
        return CELL_DEGENERATE, False, 0.0, 0.0, 0.0, no_lab, no_w
    for t in range(m):
        if wl[t] < 0:  # a guard edge survived: numerically unbounded cell
            return CELL_DEGENERATE, False, 0.0, 0.0, 0.0, no_lab, no_w

    labels = np.empty(m, np.int64)
    weights = np.empty(m, np.float64)
    for t in range(m):
        labels[t] = wl[t]

    # cotangent weight of star edge (center, q_t): the two angles flanking
    # the edge at the center, i.e. the center angles of the star triangles
    # (q_(t-1), c, q_t) and (q_t, c, q_(t+1))
    for t in range(m):
        ja = labels[t - 1] if t > 0 else labels[m - 1]
        jb = labels[t]
        jc = labels[t + 1] if t + 1 < m else labels[0]
        cax = loc[ja, 0]; cay = loc[ja, 1]
        cbx = loc[jb, 0]; cby = loc[jb, 1]
        ccx = loc[jc, 0]; ccy = loc[jc, 1]
        cr = abs(cax * cby - cay * cbx)
        cot_a = (cax * cbx + cay * cby) / cr if cr > 0.0 else 0.0
        cr = abs(cbx * ccy - cby * ccx)
        cot_b = (cbx * ccx + cby * ccy) / cr if cr > 0.0 else 0.0
        w = 0.5 * (cot_a + cot_b)
        weights[t] = w if w > 0.0 else 0.0

    wsum = 0.0
    for t in range(m):
        wsum += weights[t]
    if wsum <= 0.0:
        for t in range(m):
            weights[t] = 1.0 / m

    # displacement target: the area centroid of the cell (local CVT step)
    a2 = 0.0
    u = 0.0
    v = 0.0
    for t in range(m):
        t2 = t + 1
        if t2 == m:
            t2 = 0
        cr = wx[t] * wy[t2] - wx[t2] * wy[t]
        a2 += cr
        u += (wx[t] + wx[t2]) * cr
        v += (wy[t] + wy[t2]) * cr
    if abs(a2) < 1e-300:
        return CELL_DEGENERATE, False, 0.0, 0.0, 0.0, no_lab, no_w
    u /= 3.0 * a2
    v /= 3.0 * a2
    area = 0.5 * abs(a2)

    # trust radius: half the farthest projected neighbor distance
    dmax2 = 0.0
    for t in range(k):
        d2 = loc[t, 0] * loc[t, 0] + loc[t, 1] * loc[t, 1]
        if d2 > dmax2:
            dmax2 = d2
    vmax2 = 0.0
    for t in range(m):
        d2 = wx[t] * wx[t] + wy[t] * wy[t]
        if d2 > vmax2:
            vmax2 = d2
    trusted = vmax2 <= 0.25 * dmax2

    return CELL_OK, trusted, u, v, area, labels, weights


@njit(parallel=True, cache=True)
def smooth_pass(pts, neigh, e1, e2, skip, out_pts, closed_out):
    """One Jacobi displacement pass: read ``pts``, write ``out_pts``.

    Skipped rows (frozen edge points, degenerate neighborhoods) and rows
    whose cell is not closed keep their position bit-for-bit. Each row
    writes only its own slot, so the pass is deterministic under any
    thread count.
    """
    n = pts.shape[0]
    k = neigh.shape[1]
    for i in prange(n):
        out_pts[i, 0] = pts[i, 0]
        out_pts[i, 1] = pts[i, 1]
        out_pts[i, 2] = pts[i, 2]
        closed_out[i] = False
        if skip[i]:
            continue
        loc = np.empty((k, 2), np.float64)
        for t in range(k):
            j = neigh[i, t]
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            dz = pts[j, 2] - pts[i, 2]
            loc[t, 0] = dx * e1[i, 0] + dy * e1[i, 1] + dz * e1[i, 2]
            loc[t, 1] = dx * e2[i, 0] + dy * e2[i, 1] + dz * e2[i, 2]
        status, trusted, u, v, _area, _lab, _w = _cell_solve(loc)
        if status == CELL_OK and trusted:
            closed_out[i] = True
            out_pts[i, 0] = pts[i, 0] + u * e1[i, 0] + v * e2[i, 0]
            out_pts[i, 1] = pts[i, 1] + u * e1[i, 1] + v * e2[i, 1]
            out_pts[i, 2] = pts[i, 2] + u * e1[i, 2] + v * e2[i, 2]


@njit(parallel=True, cache=True)
def cell_area_pass(pts, neigh, e1, e2, skip, areas, closed_out):
    """Tangent-plane Voronoi cell area per point (closed cells only)."""
    n = pts.shape[0]
    k = neigh.shape[1]
    for i in prange(n):
        areas[i] = 0.0
        closed_out[i] = False
        if skip[i]:
            continue
        loc = np.empty((k, 2), np.float64)
        for t in range(k):
            j = neigh[i, t]
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            dz = pts[j, 2] - pts[i, 2]
            loc[t, 0] = dx * e1[i, 0] + dy * e1[i, 1] + dz * e1[i, 2]
            loc[t, 1] = dx * e2[i, 0] + dy * e2[i, 1] + dz * e2[i, 2]
        status, _trusted, _u, _v, area, _lab, _w = _cell_solve(loc)
        if status == CELL_OK:
            closed_out[i] = True
            areas[i] = area


@njit(parallel=True, cache=True)
def closed_cell_pass(pts, neigh, e1, e2, skip, closed_out):
    """Hull-interior (closed Voronoi cell) flag per point, no clipping."""
    n = pts.shape[0]
    k = neigh.shape[1]
    for i in prange(n):
        closed_out[i] = False
        if skip[i]:
            continue
        loc = np.empty((k, 2), np.float64)
        for t in range(k):
            j = neigh[i, t]
            dx = pts[j, 0] - pts[i, 0]
            dy = pts[j, 1] - pts[i, 1]
            dz = pts[j, 2] - pts[i, 2]
            loc[t, 0] = dx * e1[i, 0] + dy * e1[i, 1] + dz * e1[i, 2]
            loc[t, 1] = dx * e2[i, 0] + dy * e2[i, 1] + dz * e2[i, 2]
        closed_out[i] = _hull_interior(loc) == 1


@njit(cache=True)
def dart_throw(perm, pts, radii, cell, ncell, uniq_keys, starts, order_ids):
    """Sequential dart throwing over a fixed visiting order.

    Visits candidates in ``perm`` order; an unblocked candidate is accepted
    and every point within min(r_i, r_j) of it becomes blocked. The uniform
    grid (cell size >= max radius) limits conflict checks to the 27
    surrounding cells. Returns accepted indices in visiting order.
    """
    n = pts.shape[0]
    ny = ncell[1]
    nz = ncell[2]
    blocked = np.zeros(n, np.bool_)
    accepted = np.empty(n, np.int64)
    na = 0
    nkeys = uniq_keys.shape[0]
    for t in range(n):
        i = perm[t]
        if blocked[i]:
            continue
        accepted[na] = i
        na += 1
        px = pts[i, 0]
        py = pts[i, 1]
        pz = pts[i, 2]
        ri = radii[i]
        for dx in range(-1, 2):
            cx = cell[i, 0] + dx
            if cx < 0 or cx >= ncell[0]:
                continue
            for dy in range(-1, 2):
                cy = cell[i, 1] + dy
                if cy < 0 or cy >= ny:
                    continue
                for dz in range(-1, 2):
                    cz = cell[i, 2] + dz
                    if cz < 0 or cz >= nz:
                        continue
                    key = (cx * ny + cy) * nz + cz
                    s = np.searchsorted(uniq_keys, key)
                    if s >= nkeys or uniq_keys[s] != key:
                        continue
                    for u in range(starts[s], starts[s + 1]):
                        j = order_ids[u]
                        if blocked[j]:
                            continue
                        rr = radii[j] if radii[j] < ri else ri
                        ddx = pts[j, 0] - px
                        ddy = pts[j, 1] - py
                        ddz = pts[j, 2] - pz
                        if ddx * ddx + ddy * ddy + ddz * ddz < rr * rr:
                            blocked[j] = True
    return accepted[:na]
