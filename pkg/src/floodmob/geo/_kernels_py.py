"""Pure-Python geometry kernels.

Reference implementation of the hot loops; the compiled module
``floodmob.geo._kernels`` mirrors these functions operation-for-operation so
both backends produce bit-identical verdicts. Keep the arithmetic here in
exact lockstep with the .pyx file.

Conventions shared by every function:
  * polygons are packed flat: ``coords`` is an (N, 2) float64 array of ring
    vertices (rings closed, first == last), ``ring_off`` gives ring start
    offsets, ``poly_off`` gives each polygon's ring range (ring 0 is the
    exterior, the rest are holes);
  * the rectangle tree is packed level by level, leaves first, root last;
    leaf nodes reference entry ranges, internal nodes reference node ranges;
  * containment is boundary-inclusive.
"""

import numpy as np

BACKEND = "python"


def _ring_hit(coords, lo, hi, x, y):
    # 0 = outside, 1 = strictly inside, 2 = on the ring. Even-odd ray cast
    # toward +x with an exact collinearity test for boundary points.
    inside = False
    for k in range(lo, hi - 1):
        x1 = coords[k, 0]
        y1 = coords[k, 1]
        x2 = coords[k + 1, 0]
        y2 = coords[k + 1, 1]
        if (x1 <= x <= x2 or x2 <= x <= x1) and (y1 <= y <= y2 or y2 <= y <= y1):
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) == 0.0:
                return 2
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return 1 if inside else 0


def point_in_rings(coords, ring_off, r_lo, r_hi, x, y):
    """Tri-state containment for one polygon (rings [r_lo, r_hi))."""
    hit = _ring_hit(coords, ring_off[r_lo], ring_off[r_lo + 1], x, y)
    if hit != 1:
        return hit
    for r in range(r_lo + 1, r_hi):
        hole = _ring_hit(coords, ring_off[r], ring_off[r + 1], x, y)
        if hole == 2:
            return 2
        if hole == 1:
            return 0
    return 1


def classify_linear(xs, ys, coords, ring_off, poly_off, poly_bbox, out):
    """Brute-force scan: out[i] = 1 iff point i is in any polygon."""
    n_poly = poly_bbox.shape[0]
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        verdict = 0
        for p in range(n_poly):
            if (
                x < poly_bbox[p, 0]
                or x > poly_bbox[p, 2]
                or y < poly_bbox[p, 1]
                or y > poly_bbox[p, 3]
            ):
                continue
            if point_in_rings(coords, ring_off, poly_off[p], poly_off[p + 1], x, y) != 0:
                verdict = 1
                break
        out[i] = verdict


def classify_indexed(
    xs,
    ys,
    coords,
    ring_off,
    poly_off,
    node_bbox,
    node_lo,
    node_hi,
    n_leaf,
    entry_bbox,
    entry_id,
    out,
):
    """Index-accelerated variant of classify_linear (identical verdicts)."""
    n_nodes = node_bbox.shape[0]
    if n_nodes == 0:
        out[: xs.shape[0]] = 0
        return
    root = n_nodes - 1
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        verdict = 0
        stack = [root]
        while stack and verdict == 0:
            node = stack.pop()
            if (
                x < node_bbox[node, 0]
                or x > node_bbox[node, 2]
                or y < node_bbox[node, 1]
                or y > node_bbox[node, 3]
            ):
                continue
            if node < n_leaf:
                for e in range(node_lo[node], node_hi[node]):
                    if (
                        x < entry_bbox[e, 0]
                        or x > entry_bbox[e, 2]
                        or y < entry_bbox[e, 1]
                        or y > entry_bbox[e, 3]
                    ):
                        continue
                    p = entry_id[e]
                    if point_in_rings(coords, ring_off, poly_off[p], poly_off[p + 1], x, y) != 0:
                        verdict = 1
                        break
            else:
                stack.extend(range(node_lo[node], node_hi[node]))
        out[i] = verdict


def locate_indexed(
    xs,
    ys,
    coords,
    ring_off,
    poly_off,
    node_bbox,
    node_lo,
    node_hi,
    n_leaf,
    entry_bbox,
    entry_id,
    owner,
    out,
):
    """out[i] = smallest owner index among containing polygons, else -1."""
    n_nodes = node_bbox.shape[0]
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        best = -1
        if n_nodes:
            stack = [n_nodes - 1]
            while stack:
                node = stack.pop()
                if (
                    x < node_bbox[node, 0]
                    or x > node_bbox[node, 2]
                    or y < node_bbox[node, 1]
                    or y > node_bbox[node, 3]
                ):
                    continue
                if node < n_leaf:
                    for e in range(node_lo[node], node_hi[node]):
                        if (
                            x < entry_bbox[e, 0]
                            or x > entry_bbox[e, 2]
                            or y < entry_bbox[e, 1]
                            or y > entry_bbox[e, 3]
                        ):
                            continue
                        p = entry_id[e]
                        own = owner[p]
                        if best != -1 and own >= best:
                            continue
                        if (
                            point_in_rings(coords, ring_off, poly_off[p], poly_off[p + 1], x, y)
                            != 0
                        ):
                            best = own
                else:
                    stack.extend(range(node_lo[node], node_hi[node]))
        out[i] = best


def query_rect(
    node_bbox, node_lo, node_hi, n_leaf, entry_bbox, entry_id, qminx, qminy, qmaxx, qmaxy
):
    """Entry ids whose bbox intersects the query rectangle (unordered)."""
    n_nodes = node_bbox.shape[0]
    hits = []
    if n_nodes == 0:
        return np.empty(0, dtype=np.int64)
    stack = [n_nodes - 1]
    while stack:
        node = stack.pop()
        if (
            qmaxx < node_bbox[node, 0]
            or qminx > node_bbox[node, 2]
            or qmaxy < node_bbox[node, 1]
            or qminy > node_bbox[node, 3]
        ):
            continue
        if node < n_leaf:
            for e in range(node_lo[node], node_hi[node]):
                if (
                    qmaxx < entry_bbox[e, 0]
                    or qminx > entry_bbox[e, 2]
                    or qmaxy < entry_bbox[e, 1]
                    or qminy > entry_bbox[e, 3]
                ):
                    continue
                hits.append(entry_id[e])
        else:
            stack.extend(range(node_lo[node], node_hi[node]))
    return np.asarray(hits, dtype=np.int64)


def _orient(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _on_segment(ax, ay, bx, by, px, py):
    # collinearity is established by the caller
    return (ax <= px <= bx or bx <= px <= ax) and (ay <= py <= by or by <= py <= ay)


def segments_cross(ca, a_lo, a_hi, cb, b_lo, b_hi):
    """True if any edge of ring A touches or crosses any edge of ring B."""
    for i in range(a_lo, a_hi - 1):
        ax1 = ca[i, 0]
        ay1 = ca[i, 1]
        ax2 = ca[i + 1, 0]
        ay2 = ca[i + 1, 1]
        for j in range(b_lo, b_hi - 1):
            bx1 = cb[j, 0]
            by1 = cb[j, 1]
            bx2 = cb[j + 1, 0]
            by2 = cb[j + 1, 1]
            d1 = _orient(bx1, by1, bx2, by2, ax1, ay1)
            d2 = _orient(bx1, by1, bx2, by2, ax2, ay2)
            d3 = _orient(ax1, ay1, ax2, ay2, bx1, by1)
            d4 = _orient(ax1, ay1, ax2, ay2, bx2, by2)
            if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
                (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
            ):
                return True
            if d1 == 0 and _on_segment(bx1, by1, bx2, by2, ax1, ay1):
                return True
            if d2 == 0 and _on_segment(bx1, by1, bx2, by2, ax2, ay2):
                return True
            if d3 == 0 and _on_segment(ax1, ay1, ax2, ay2, bx1, by1):
                return True
            if d4 == 0 and _on_segment(ax1, ay1, ax2, ay2, bx2, by2):
                return True
    return False
