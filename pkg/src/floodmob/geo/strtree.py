"""Bulk-loaded rectangle tree (sort-tile-recursive packing).

Built once over a set of bounding boxes, immutable afterwards. The packed
layout is a handful of flat arrays consumable by both kernel backends: nodes
are stored level by level (leaves first, root last); a leaf's range indexes
the permuted entry arrays, an internal node's range indexes the node arrays
of the level below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from floodmob.geo import kernels

DEFAULT_LEAF_CAPACITY = 16


def _str_order(cx: np.ndarray, cy: np.ndarray, capacity: int) -> np.ndarray:
    """Sort-tile-recursive permutation: vertical slices by x, tiles by y."""
    n = cx.shape[0]
    n_tiles = math.ceil(n / capacity)
    n_slices = math.ceil(math.sqrt(n_tiles))
    slice_size = n_slices * capacity
    order = np.argsort(cx, kind="stable")
    for start in range(0, n, slice_size):
        seg = order[start : start + slice_size]
        order[start : start + slice_size] = seg[np.argsort(cy[seg], kind="stable")]
    return order


@dataclass(frozen=True)
class SpatialIndex:
    """Read-only rectangle tree; every query returns a superset of the truly
    intersecting entries and never omits one."""

    n_entries: int
    leaf_capacity: int
    entry_bbox: np.ndarray  # (n, 4) permuted [minx, miny, maxx, maxy]
    entry_id: np.ndarray  # (n,) original ids in permuted order
    node_bbox: np.ndarray  # (m, 4)
    node_lo: np.ndarray  # (m,) child range start (entries for leaves, nodes otherwise)
    node_hi: np.ndarray  # (m,) child range end
    n_leaf_nodes: int

    def query(self, rect) -> np.ndarray:
        """Ids of entries whose bbox intersects rect (minx, miny, maxx, maxy),
        ascending."""
        minx, miny, maxx, maxy = (float(v) for v in rect)
        hits = kernels.impl.query_rect(
            self.node_bbox,
            self.node_lo,
            self.node_hi,
            self.n_leaf_nodes,
            self.entry_bbox,
            self.entry_id,
            minx,
            miny,
            maxx,
            maxy,
        )
        hits = np.asarray(hits, dtype=np.int64)
        hits.sort()
        return hits


def build(bboxes: np.ndarray, leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> SpatialIndex:
    """Pack bboxes (k, 4) into an STR tree. k == 0 yields a valid empty index."""
    if leaf_capacity < 1:
        raise ValueError("leaf_capacity must be >= 1")
    bboxes = np.ascontiguousarray(bboxes, dtype=np.float64).reshape(-1, 4)
    n = bboxes.shape[0]
    if n == 0:
        empty4 = np.empty((0, 4), dtype=np.float64)
        empty_i = np.empty(0, dtype=np.int64)
        return SpatialIndex(0, leaf_capacity, empty4, empty_i, empty4, empty_i, empty_i, 0)

    cx = (bboxes[:, 0] + bboxes[:, 2]) * 0.5
    cy = (bboxes[:, 1] + bboxes[:, 3]) * 0.5
    order = _str_order(cx, cy, leaf_capacity)
    entry_bbox = np.ascontiguousarray(bboxes[order])
    entry_id = order.astype(np.int64)

    node_bbox: list[np.ndarray] = []
    node_lo: list[int] = []
    node_hi: list[int] = []

    # leaf level over entry ranges
    for lo in range(0, n, leaf_capacity):
        hi = min(lo + leaf_capacity, n)
        seg = entry_bbox[lo:hi]
        node_bbox.append(
            np.array(
                [seg[:, 0].min(), seg[:, 1].min(), seg[:, 2].max(), seg[:, 3].max()]
            )
        )
        node_lo.append(lo)
        node_hi.append(hi)
    n_leaf_nodes = len(node_bbox)

    level_start = 0
    level_count = n_leaf_nodes
    while level_count > 1:
        boxes = np.asarray(node_bbox[level_start : level_start + level_count])
        ncx = (boxes[:, 0] + boxes[:, 2]) * 0.5
        ncy = (boxes[:, 1] + boxes[:, 3]) * 0.5
        perm = _str_order(ncx, ncy, leaf_capacity)
        # permute this level in place so each parent's children are contiguous
        for arr in (node_bbox, node_lo, node_hi):
            seg = arr[level_start : level_start + level_count]
            arr[level_start : level_start + level_count] = [seg[j] for j in perm]
        boxes = boxes[perm]
        for lo in range(0, level_count, leaf_capacity):
            hi = min(lo + leaf_capacity, level_count)
            seg = boxes[lo:hi]
            node_bbox.append(
                np.array(
                    [seg[:, 0].min(), seg[:, 1].min(), seg[:, 2].max(), seg[:, 3].max()]
                )
            )
            node_lo.append(level_start + lo)
            node_hi.append(level_start + hi)
        new_count = len(node_bbox) - (level_start + level_count)
        level_start += level_count
        level_count = new_count

    return SpatialIndex(
        n_entries=n,
        leaf_capacity=leaf_capacity,
        entry_bbox=entry_bbox,
        entry_id=entry_id,
        node_bbox=np.ascontiguousarray(np.asarray(node_bbox), dtype=np.float64),
        node_lo=np.asarray(node_lo, dtype=np.int64),
        node_hi=np.asarray(node_hi, dtype=np.int64),
        n_leaf_nodes=n_leaf_nodes,
    )
