"""Compiled neighbour-search kernels for the point-pattern simulator.

All kernels work on (n, 3) coordinate arrays; 2D patterns carry z = 0 and
a single cell layer along z. Uniform cell lists give linear-time
neighbour queries; periodic boxes use minimum-image displacements.
Kernels are nogil so independent trials can run on a thread pool.
"""

import numpy as np
from numba import njit

# per-control haystack buffer; generous for every density this package runs at
_H_CAP = 16384


@njit(cache=True, nogil=True)
def cell_index(pts, box, dims):
    """Flat cell id per point. Points at the upper edge clamp inward."""
    n = pts.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        ix = int(pts[i, 0] / box[0] * dims[0])
        iy = int(pts[i, 1] / box[1] * dims[1])
        iz = int(pts[i, 2] / box[2] * dims[2])
        if ix >= dims[0]:
            ix = dims[0] - 1
        if iy >= dims[1]:
            iy = dims[1] - 1
        if iz >= dims[2]:
            iz = dims[2] - 1
        out[i] = (ix * dims[1] + iy) * dims[2] + iz
    return out


@njit(cache=True, nogil=True)
def bucket_sort(cells, n_cells):
    """Counting sort: returns (starts, order) with cell c owning
    order[starts[c]:starts[c+1]]."""
    n = cells.shape[0]
    counts = np.zeros(n_cells + 1, dtype=np.int64)
    for i in range(n):
        counts[cells[i] + 1] += 1
    for c in range(n_cells):
        counts[c + 1] += counts[c]
    order = np.empty(n, dtype=np.int64)
    fill = counts[:-1].copy()
    for i in range(n):
        c = cells[i]
        order[fill[c]] = i
        fill[c] += 1
    return counts, order


@njit(cache=True, nogil=True, inline="always")
def _dist2(pts, i, qx, qy, qz, box, periodic):
    dx = pts[i, 0] - qx
    dy = pts[i, 1] - qy
    dz = pts[i, 2] - qz
    if periodic:
        dx -= box[0] * np.rint(dx / box[0])
        dy -= box[1] * np.rint(dy / box[1])
        dz -= box[2] * np.rint(dz / box[2])
    return dx * dx + dy * dy + dz * dz


@njit(cache=True, nogil=True, inline="always")
def _wrap(c, n):
    if c < 0:
        return c + n
    if c >= n:
        return c - n
    return c


@njit(cache=True, nogil=True)
def mark_isolated(pts, box, dims, starts, order, radius, periodic):
    """viable[i] = True iff no other point lies within radius of point i.

    Scans the cell neighbourhood covering the radius and exits on the
    first violator.
    """
    n = pts.shape[0]
    viable = np.ones(n, dtype=np.bool_)
    r2 = radius * radius
    rx = int(radius / (box[0] / dims[0])) + 1
    ry = int(radius / (box[1] / dims[1])) + 1
    rz = int(radius / (box[2] / dims[2])) + 1 if dims[2] > 1 else 0
    for i in range(n):
        ix = int(pts[i, 0] / box[0] * dims[0])
        iy = int(pts[i, 1] / box[1] * dims[1])
        iz = int(pts[i, 2] / box[2] * dims[2])
        if ix >= dims[0]:
            ix = dims[0] - 1
        if iy >= dims[1]:
            iy = dims[1] - 1
        if iz >= dims[2]:
            iz = dims[2] - 1
        done = False
        for cx in range(ix - rx, ix + rx + 1):
            gx = _wrap(cx, dims[0]) if periodic else cx
            if gx < 0 or gx >= dims[0]:
                continue
            for cy in range(iy - ry, iy + ry + 1):
                gy = _wrap(cy, dims[1]) if periodic else cy
                if gy < 0 or gy >= dims[1]:
                    continue
                for cz in range(iz - rz, iz + rz + 1):
                    gz = _wrap(cz, dims[2]) if periodic else cz
                    if gz < 0 or gz >= dims[2]:
                        continue
                    c = (gx * dims[1] + gy) * dims[2] + gz
                    for s in range(starts[c], starts[c + 1]):
                        j = order[s]
                        if j == i:
                            continue
                        if _dist2(pts, j, pts[i, 0], pts[i, 1], pts[i, 2],
                                  box, periodic) <= r2:
                            viable[i] = False
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
    return viable


@njit(cache=True, nogil=True)
def haystack_classify(controls, viable, readouts, box, dims, starts, order,
                      r_min, r_max, r_rr, periodic):
    """Per-control active-readout count k (Algorithm: gather, kill, count).

    For each viable control: gather the haystack of readouts within
    r_max + r_rr; a readout strictly inside r_min kills the control
    (k = -1); otherwise k counts readouts within r_max having no other
    haystack member within r_rr. Non-viable controls get k = -2.
    """
    nc = controls.shape[0]
    kcount = np.full(nc, -2, dtype=np.int64)
    gather = r_max + r_rr
    g2 = gather * gather
    rmin2 = r_min * r_min
    rmax2 = r_max * r_max
    rrr2 = r_rr * r_rr
    rx = int(gather / (box[0] / dims[0])) + 1
    ry = int(gather / (box[1] / dims[1])) + 1
    rz = int(gather / (box[2] / dims[2])) + 1 if dims[2] > 1 else 0
    hay = np.empty(_H_CAP, dtype=np.int64)
    hd2 = np.empty(_H_CAP, dtype=np.float64)
    for ci in range(nc):
        if not viable[ci]:
            continue
        qx, qy, qz = controls[ci, 0], controls[ci, 1], controls[ci, 2]
        ix = int(qx / box[0] * dims[0])
        iy = int(qy / box[1] * dims[1])
        iz = int(qz / box[2] * dims[2])
        if ix >= dims[0]:
            ix = dims[0] - 1
        if iy >= dims[1]:
            iy = dims[1] - 1
        if iz >= dims[2]:
            iz = dims[2] - 1
        nh = 0
        killed = False
        for cx in range(ix - rx, ix + rx + 1):
            gx = _wrap(cx, dims[0]) if periodic else cx
            if gx < 0 or gx >= dims[0]:
                continue
            for cy in range(iy - ry, iy + ry + 1):
                gy = _wrap(cy, dims[1]) if periodic else cy
                if gy < 0 or gy >= dims[1]:
                    continue
                for cz in range(iz - rz, iz + rz + 1):
                    gz = _wrap(cz, dims[2]) if periodic else cz
                    if gz < 0 or gz >= dims[2]:
                        continue
                    c = (gx * dims[1] + gy) * dims[2] + gz
                    for s in range(starts[c], starts[c + 1]):
                        j = order[s]
                        d2 = _dist2(readouts, j, qx, qy, qz, box, periodic)
                        if d2 < rmin2:
                            killed = True
                            break
                        if d2 <= g2:
                            if nh >= _H_CAP:
                                raise ValueError("haystack buffer overflow; "
                                                 "density too high for this cap")
                            hay[nh] = j
                            hd2[nh] = d2
                            nh += 1
                    if killed:
                        break
                if killed:
                    break
            if killed:
                break
        if killed:
            kcount[ci] = -1
            continue
        k = 0
        for a in range(nh):
            if hd2[a] > rmax2:
                continue
            ja = hay[a]
            isolated = True
            for b in range(nh):
                if b == a:
                    continue
                jb = hay[b]
                if _dist2(readouts, jb, readouts[ja, 0], readouts[ja, 1],
                          readouts[ja, 2], box, periodic) <= rrr2:
                    isolated = False
                    break
            if isolated:
                k += 1
        kcount[ci] = k
    return kcount


@njit(cache=True, nogil=True)
def pair_neighbours(pts, box, dims, starts, order, r_cc, periodic):
    """(count, partner, dist2) of neighbours within r_cc per point.

    partner holds the last neighbour seen; it identifies THE neighbour
    exactly when count == 1, which is all the pair classifier needs.
    """
    n = pts.shape[0]
    cnt = np.zeros(n, dtype=np.int64)
    partner = np.full(n, -1, dtype=np.int64)
    pd2 = np.zeros(n, dtype=np.float64)
    r2 = r_cc * r_cc
    rx = int(r_cc / (box[0] / dims[0])) + 1
    ry = int(r_cc / (box[1] / dims[1])) + 1
    rz = int(r_cc / (box[2] / dims[2])) + 1 if dims[2] > 1 else 0
    for i in range(n):
        ix = int(pts[i, 0] / box[0] * dims[0])
        iy = int(pts[i, 1] / box[1] * dims[1])
        iz = int(pts[i, 2] / box[2] * dims[2])
        if ix >= dims[0]:
            ix = dims[0] - 1
        if iy >= dims[1]:
            iy = dims[1] - 1
        if iz >= dims[2]:
            iz = dims[2] - 1
        for cx in range(ix - rx, ix + rx + 1):
            gx = _wrap(cx, dims[0]) if periodic else cx
            if gx < 0 or gx >= dims[0]:
                continue
            for cy in range(iy - ry, iy + ry + 1):
                gy = _wrap(cy, dims[1]) if periodic else cy
                if gy < 0 or gy >= dims[1]:
                    continue
                for cz in range(iz - rz, iz + rz + 1):
                    gz = _wrap(cz, dims[2]) if periodic else cz
                    if gz < 0 or gz >= dims[2]:
                        continue
                    c = (gx * dims[1] + gy) * dims[2] + gz
                    for s in range(starts[c], starts[c + 1]):
                        j = order[s]
                        if j == i:
                            continue
                        d2 = _dist2(pts, j, pts[i, 0], pts[i, 1], pts[i, 2],
                                    box, periodic)
                        if d2 <= r2:
                            cnt[i] += 1
                            partner[i] = j
                            pd2[i] = d2
    return cnt, partner, pd2
