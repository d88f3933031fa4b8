# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geometry kernels.

Mirrors floodmob.geo._kernels_py function-for-function; keep arithmetic in
exact lockstep so both backends return bit-identical verdicts.
"""

from libc.stdint cimport int64_t, uint8_t
from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "compiled"


cdef inline int _ring_hit(const double[:, ::1] coords, Py_ssize_t lo, Py_ssize_t hi,
                          double x, double y) nogil:
    cdef bint inside = False
    cdef Py_ssize_t k
    cdef double x1, y1, x2, y2, xc
    for k in range(lo, hi - 1):
        x1 = coords[k, 0]
        y1 = coords[k, 1]
        x2 = coords[k + 1, 0]
        y2 = coords[k + 1, 1]
        if ((x1 <= x <= x2) or (x2 <= x <= x1)) and ((y1 <= y <= y2) or (y2 <= y <= y1)):
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) == 0.0:
                return 2
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return 1 if inside else 0


cdef inline int _rings_hit(const double[:, ::1] coords, const int64_t[::1] ring_off,
                           Py_ssize_t r_lo, Py_ssize_t r_hi, double x, double y) nogil:
    cdef int hit = _ring_hit(coords, ring_off[r_lo], ring_off[r_lo + 1], x, y)
    cdef int hole
    cdef Py_ssize_t r
    if hit != 1:
        return hit
    for r in range(r_lo + 1, r_hi):
        hole = _ring_hit(coords, ring_off[r], ring_off[r + 1], x, y)
        if hole == 2:
            return 2
        if hole == 1:
            return 0
    return 1


def point_in_rings(const double[:, ::1] coords, const int64_t[::1] ring_off,
                   Py_ssize_t r_lo, Py_ssize_t r_hi, double x, double y):
    """Tri-state containment for one polygon (rings [r_lo, r_hi))."""
    return _rings_hit(coords, ring_off, r_lo, r_hi, x, y)


def classify_linear(const double[::1] xs, const double[::1] ys,
                    const double[:, ::1] coords, const int64_t[::1] ring_off,
                    const int64_t[::1] poly_off, const double[:, ::1] poly_bbox,
                    uint8_t[::1] out):
    """Brute-force scan: out[i] = 1 iff point i is in any polygon."""
    cdef Py_ssize_t n_poly = poly_bbox.shape[0]
    cdef Py_ssize_t i, p
    cdef double x, y
    cdef uint8_t verdict
    with nogil:
        for i in range(xs.shape[0]):
            x = xs[i]
            y = ys[i]
            verdict = 0
            for p in range(n_poly):
                if (x < poly_bbox[p, 0] or x > poly_bbox[p, 2]
                        or y < poly_bbox[p, 1] or y > poly_bbox[p, 3]):
                    continue
                if _rings_hit(coords, ring_off, poly_off[p], poly_off[p + 1], x, y) != 0:
                    verdict = 1
                    break
            out[i] = verdict


def classify_indexed(const double[::1] xs, const double[::1] ys,
                     const double[:, ::1] coords, const int64_t[::1] ring_off,
                     const int64_t[::1] poly_off,
                     const double[:, ::1] node_bbox, const int64_t[::1] node_lo,
                     const int64_t[::1] node_hi, Py_ssize_t n_leaf,
                     const double[:, ::1] entry_bbox, const int64_t[::1] entry_id,
                     uint8_t[::1] out):
    """Index-accelerated variant of classify_linear (identical verdicts)."""
    cdef Py_ssize_t n_nodes = node_bbox.shape[0]
    cdef Py_ssize_t i, e, node, top
    cdef int64_t p, child
    cdef double x, y
    cdef uint8_t verdict
    cdef Py_ssize_t* stack
    if n_nodes == 0:
        for i in range(xs.shape[0]):
            out[i] = 0
        return
    stack = <Py_ssize_t*> malloc(n_nodes * sizeof(Py_ssize_t))
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(xs.shape[0]):
                x = xs[i]
                y = ys[i]
                verdict = 0
                top = 0
                stack[top] = n_nodes - 1
                top += 1
                while top > 0 and verdict == 0:
                    top -= 1
                    node = stack[top]
                    if (x < node_bbox[node, 0] or x > node_bbox[node, 2]
                            or y < node_bbox[node, 1] or y > node_bbox[node, 3]):
                        continue
                    if node < n_leaf:
                        for e in range(node_lo[node], node_hi[node]):
                            if (x < entry_bbox[e, 0] or x > entry_bbox[e, 2]
                                    or y < entry_bbox[e, 1] or y > entry_bbox[e, 3]):
                                continue
                            p = entry_id[e]
                            if _rings_hit(coords, ring_off, poly_off[p],
                                          poly_off[p + 1], x, y) != 0:
                                verdict = 1
                                break
                    else:
                        for child in range(node_lo[node], node_hi[node]):
                            stack[top] = child
                            top += 1
                out[i] = verdict
    finally:
        free(stack)


def locate_indexed(const double[::1] xs, const double[::1] ys,
                   const double[:, ::1] coords, const int64_t[::1] ring_off,
                   const int64_t[::1] poly_off,
                   const double[:, ::1] node_bbox, const int64_t[::1] node_lo,
                   const int64_t[::1] node_hi, Py_ssize_t n_leaf,
                   const double[:, ::1] entry_bbox, const int64_t[::1] entry_id,
                   const int64_t[::1] owner, int64_t[::1] out):
    """out[i] = smallest owner index among containing polygons, else -1."""
    cdef Py_ssize_t n_nodes = node_bbox.shape[0]
    cdef Py_ssize_t i, e, node, top
    cdef int64_t p, best, own, child
    cdef double x, y
    cdef Py_ssize_t* stack
    if n_nodes == 0:
        for i in range(xs.shape[0]):
            out[i] = -1
        return
    stack = <Py_ssize_t*> malloc(n_nodes * sizeof(Py_ssize_t))
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(xs.shape[0]):
                x = xs[i]
                y = ys[i]
                best = -1
                top = 0
                stack[top] = n_nodes - 1
                top += 1
                while top > 0:
                    top -= 1
                    node = stack[top]
                    if (x < node_bbox[node, 0] or x > node_bbox[node, 2]
                            or y < node_bbox[node, 1] or y > node_bbox[node, 3]):
                        continue
                    if node < n_leaf:
                        for e in range(node_lo[node], node_hi[node]):
                            if (x < entry_bbox[e, 0] or x > entry_bbox[e, 2]
                                    or y < entry_bbox[e, 1] or y > entry_bbox[e, 3]):
                                continue
                            p = entry_id[e]
                            own = owner[p]
                            if best != -1 and own >= best:
                                continue
                            if _rings_hit(coords, ring_off, poly_off[p],
                                          poly_off[p + 1], x, y) != 0:
                                best = own
                    else:
                        for child in range(node_lo[node], node_hi[node]):
                            stack[top] = child
                            top += 1
                out[i] = best
    finally:
        free(stack)


def query_rect(const double[:, ::1] node_bbox, const int64_t[::1] node_lo,
               const int64_t[::1] node_hi, Py_ssize_t n_leaf,
               const double[:, ::1] entry_bbox, const int64_t[::1] entry_id,
               double qminx, double qminy, double qmaxx, double qmaxy):
    """Entry ids whose bbox intersects the query rectangle (unordered)."""
    cdef Py_ssize_t n_nodes = node_bbox.shape[0]
    cdef Py_ssize_t e, node, top
    cdef list hits = []
    cdef Py_ssize_t* stack
    if n_nodes == 0:
        return np.empty(0, dtype=np.int64)
    stack = <Py_ssize_t*> malloc(n_nodes * sizeof(Py_ssize_t))
    if stack == NULL:
        raise MemoryError()
    try:
        top = 0
        stack[top] = n_nodes - 1
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if (qmaxx < node_bbox[node, 0] or qminx > node_bbox[node, 2]
                    or qmaxy < node_bbox[node, 1] or qminy > node_bbox[node, 3]):
                continue
            if node < n_leaf:
                for e in range(node_lo[node], node_hi[node]):
                    if (qmaxx < entry_bbox[e, 0] or qminx > entry_bbox[e, 2]
                            or qmaxy < entry_bbox[e, 1] or qminy > entry_bbox[e, 3]):
                        continue
                    hits.append(entry_id[e])
            else:
                for e in range(node_lo[node], node_hi[node]):
                    stack[top] = e
                    top += 1
    finally:
        free(stack)
    return np.asarray(hits, dtype=np.int64)


cdef inline double _orient(double ox, double oy, double ax, double ay,
                           double bx, double by) nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


cdef inline bint _on_segment(double ax, double ay, double bx, double by,
                             double px, double py) nogil:
    return (((ax <= px <= bx) or (bx <= px <= ax))
            and ((ay <= py <= by) or (by <= py <= ay)))


cdef bint _segments_cross(const double[:, ::1] ca, Py_ssize_t a_lo, Py_ssize_t a_hi,
                          const double[:, ::1] cb, Py_ssize_t b_lo, Py_ssize_t b_hi) nogil:
    cdef Py_ssize_t i, j
    cdef double ax1, ay1, ax2, ay2, bx1, by1, bx2, by2, d1, d2, d3, d4
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
            if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
                    ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
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


def segments_cross(const double[:, ::1] ca, Py_ssize_t a_lo, Py_ssize_t a_hi,
                   const double[:, ::1] cb, Py_ssize_t b_lo, Py_ssize_t b_hi):
    """True if any edge of ring A touches or crosses any edge of ring B."""
    return bool(_segments_cross(ca, a_lo, a_hi, cb, b_lo, b_hi))
