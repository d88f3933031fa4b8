"""Geometry primitives, spatial index, and flood-prone classification.

Planar geometry on WGS84 lon/lat coordinates. Containment is
boundary-inclusive everywhere: a point on a polygon edge or vertex counts as
inside, which keeps shared-boundary dwell time from being dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from floodmob.geo import kernels, strtree
from floodmob.geo.strtree import DEFAULT_LEAF_CAPACITY, SpatialIndex

__all__ = [
    "GeometryError",
    "GeoPoint",
    "PolygonGeom",
    "SpatialIndex",
    "FloodplainMap",
    "CbgLocator",
    "point_in_polygon",
    "build_index",
    "classify_point",
    "classify_points",
    "classify_points_linear",
    "locate_cbg",
    "locate_points",
    "polygons_intersect",
    "cbg_is_flood_prone",
]


class GeometryError(ValueError):
    """Raised for malformed geometry (open ring, too few vertices, bad range)."""


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0) or not (-90.0 <= self.lat <= 90.0):
            raise GeometryError(f"coordinate out of range: ({self.lon}, {self.lat})")


def _normalize_ring(vertices) -> np.ndarray:
    """Validate a ring and return it as a closed (k, 2) float64 array."""
    arr = np.asarray(
        [(v.lon, v.lat) if isinstance(v, GeoPoint) else (v[0], v[1]) for v in vertices],
        dtype=np.float64,
    )
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise GeometryError("ring needs at least 3 vertices of (lon, lat)")
    if not np.isfinite(arr).all():
        raise GeometryError("ring has non-finite coordinates")
    if arr[0, 0] != arr[-1, 0] or arr[0, 1] != arr[-1, 1]:
        arr = np.vstack([arr, arr[:1]])
    if np.unique(arr[:-1], axis=0).shape[0] < 3:
        raise GeometryError("ring has fewer than 3 distinct vertices")
    return np.ascontiguousarray(arr)


class PolygonGeom:
    """Simple polygon: one exterior ring plus optional holes.

    Rings are normalized to closed form (first vertex == last). The bbox
    covers every vertex of every ring.
    """

    __slots__ = ("exterior", "holes", "bbox")

    def __init__(self, exterior, holes: Iterable = ()):
        self.exterior = _normalize_ring(exterior)
        self.holes = tuple(_normalize_ring(h) for h in holes)
        allpts = (
            np.vstack([self.exterior, *self.holes]) if self.holes else self.exterior
        )
        self.bbox = (
            float(allpts[:, 0].min()),
            float(allpts[:, 1].min()),
            float(allpts[:, 0].max()),
            float(allpts[:, 1].max()),
        )

    @property
    def rings(self) -> tuple[np.ndarray, ...]:
        return (self.exterior, *self.holes)

    def __repr__(self):
        return (
            f"PolygonGeom({self.exterior.shape[0] - 1} vertices, "
            f"{len(self.holes)} holes)"
        )


class PackedPolygons:
    """Flat-array view of a polygon list, the layout the kernels consume."""

    __slots__ = ("coords", "ring_off", "poly_off", "bboxes", "n")

    def __init__(self, polygons: Sequence[PolygonGeom]):
        rings: list[np.ndarray] = []
        poly_off = [0]
        bboxes = np.empty((len(polygons), 4), dtype=np.float64)
        for i, poly in enumerate(polygons):
            rings.extend(poly.rings)
            poly_off.append(len(rings))
            bboxes[i] = poly.bbox
        ring_off = np.zeros(len(rings) + 1, dtype=np.int64)
        for r, ring in enumerate(rings):
            ring_off[r + 1] = ring_off[r] + ring.shape[0]
        coords = (
            np.vstack(rings)
            if rings
            else np.empty((0, 2), dtype=np.float64)
        )
        self.coords = np.ascontiguousarray(coords, dtype=np.float64)
        self.ring_off = ring_off
        self.poly_off = np.asarray(poly_off, dtype=np.int64)
        self.bboxes = bboxes
        self.n = len(polygons)


class FloodplainMap:
    """Indexed collection of floodplain polygons (the hazard layer)."""

    __slots__ = ("polygons", "packed", "index")

    def __init__(self, polygons: Sequence[PolygonGeom], leaf_capacity: int = DEFAULT_LEAF_CAPACITY):
        self.polygons = tuple(polygons)
        self.packed = PackedPolygons(self.polygons)
        self.index = strtree.build(self.packed.bboxes, leaf_capacity=leaf_capacity)

    def __len__(self):
        return len(self.polygons)


def point_in_polygon(p: GeoPoint, g: PolygonGeom) -> bool:
    """Boundary-inclusive containment of p in g (holes excluded)."""
    packed = g if isinstance(g, PackedPolygons) else PackedPolygons([g])
    hit = kernels.impl.point_in_rings(
        packed.coords, packed.ring_off, 0, int(packed.poly_off[1]), p.lon, p.lat
    )
    return hit != 0


def build_index(geoms: Sequence[PolygonGeom], leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> SpatialIndex:
    """Bulk-load an STR rectangle tree over the geometries' bboxes."""
    bboxes = np.asarray([g.bbox for g in geoms], dtype=np.float64).reshape(-1, 4)
    return strtree.build(bboxes, leaf_capacity=leaf_capacity)


def _as_xy(lons, lats) -> tuple[np.ndarray, np.ndarray]:
    xs = np.ascontiguousarray(lons, dtype=np.float64)
    ys = np.ascontiguousarray(lats, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("lon/lat arrays must be 1-d and equal length")
    return xs, ys


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n)) if n else 1
    step = -(-n // workers)
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)] or [(0, 0)]


def classify_points(lons, lats, fmap: FloodplainMap, workers: int = 1) -> np.ndarray:
    """Vector of booleans: point i lies inside some floodplain polygon.

    Index-accelerated; identical to the linear scan by construction. Output
    order follows input order regardless of worker count.
    """
    xs, ys = _as_xy(lons, lats)
    out = np.zeros(xs.shape[0], dtype=np.uint8)
    idx = fmap.index
    packed = fmap.packed

    def run(lo, hi):
        kernels.impl.classify_indexed(
            xs[lo:hi],
            ys[lo:hi],
            packed.coords,
            packed.ring_off,
            packed.poly_off,
            idx.node_bbox,
            idx.node_lo,
            idx.node_hi,
            idx.n_leaf_nodes,
            idx.entry_bbox,
            idx.entry_id,
            out[lo:hi],
        )

    spans = _chunks(xs.shape[0], workers)
    if len(spans) == 1:
        run(*spans[0])
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            list(pool.map(lambda s: run(*s), spans))
    return out.astype(bool)


def classify_points_linear(lons, lats, fmap: FloodplainMap) -> np.ndarray:
    """Brute-force scan over every polygon; the reference path the index must
    reproduce exactly."""
    xs, ys = _as_xy(lons, lats)
    out = np.zeros(xs.shape[0], dtype=np.uint8)
    packed = fmap.packed
    kernels.impl.classify_linear(
        xs, ys, packed.coords, packed.ring_off, packed.poly_off, packed.bboxes, out
    )
    return out.astype(bool)


def classify_point(p: GeoPoint, fmap: FloodplainMap) -> bool:
    return bool(classify_points([p.lon], [p.lat], fmap)[0])


class CbgLocator:
    """Maps points to CBG ids.

    Multi-part geometries are flattened to (part, owner) pairs; ties on
    shared boundaries resolve to the lexicographically smallest cbg_id, which
    falls out of owners being stored in sorted-id order.
    """

    __slots__ = ("cbg_ids", "packed", "index", "_owner")

    def __init__(self, cbgs: Iterable[tuple[str, Sequence[PolygonGeom]]],
                 leaf_capacity: int = DEFAULT_LEAF_CAPACITY):
        items = sorted(cbgs, key=lambda kv: kv[0])
        ids = [k for k, _ in items]
        if len(set(ids)) != len(ids):
            raise GeometryError("duplicate cbg_id in locator input")
        parts: list[PolygonGeom] = []
        owner: list[int] = []
        for pos, (_, geoms) in enumerate(items):
            for g in geoms:
                parts.append(g)
                owner.append(pos)
        self.cbg_ids = ids
        self.packed = PackedPolygons(parts)
        self.index = strtree.build(self.packed.bboxes, leaf_capacity=leaf_capacity)
        self._owner = np.asarray(owner, dtype=np.int64)


def locate_points(lons, lats, locator: CbgLocator, workers: int = 1) -> list[Optional[str]]:
    """Containing cbg_id per point (None when no CBG contains it)."""
    xs, ys = _as_xy(lons, lats)
    out = np.empty(xs.shape[0], dtype=np.int64)
    idx = locator.index
    packed = locator.packed

    def run(lo, hi):
        kernels.impl.locate_indexed(
            xs[lo:hi],
            ys[lo:hi],
            packed.coords,
            packed.ring_off,
            packed.poly_off,
            idx.node_bbox,
            idx.node_lo,
            idx.node_hi,
            idx.n_leaf_nodes,
            idx.entry_bbox,
            idx.entry_id,
            locator._owner,
            out[lo:hi],
        )

    spans = _chunks(xs.shape[0], workers)
    if len(spans) == 1:
        run(*spans[0])
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            list(pool.map(lambda s: run(*s), spans))
    return [locator.cbg_ids[i] if i >= 0 else None for i in out]


def locate_cbg(p: GeoPoint, locator: CbgLocator) -> Optional[str]:
    return locate_points([p.lon], [p.lat], locator)[0]


def polygons_intersect(a: PolygonGeom, b: PolygonGeom) -> bool:
    """True when the polygons share area or touch.

    bbox prefilter, then vertex containment either direction, then
    edge-to-edge crossing over every ring pair. Exact for simple polygons.
    """
    ab, bb = a.bbox, b.bbox
    if ab[2] < bb[0] or bb[2] < ab[0] or ab[3] < bb[1] or bb[3] < ab[1]:
        return False
    pa = PackedPolygons([a])
    pb = PackedPolygons([b])
    impl = kernels.impl
    for x, y in a.exterior[:-1]:
        if impl.point_in_rings(pb.coords, pb.ring_off, 0, int(pb.poly_off[1]), x, y) != 0:
            return True
    for x, y in b.exterior[:-1]:
        if impl.point_in_rings(pa.coords, pa.ring_off, 0, int(pa.poly_off[1]), x, y) != 0:
            return True
    for ra in range(int(pa.poly_off[1])):
        for rb in range(int(pb.poly_off[1])):
            if impl.segments_cross(
                pa.coords,
                int(pa.ring_off[ra]),
                int(pa.ring_off[ra + 1]),
                pb.coords,
                int(pb.ring_off[rb]),
                int(pb.ring_off[rb + 1]),
            ):
                return True
    return False


def cbg_is_flood_prone(geometry, fmap: FloodplainMap) -> bool:
    """True iff any part of the CBG geometry intersects any floodplain polygon.

    geometry may be a PolygonGeom or a sequence of parts (multi-part CBGs).
    """
    parts = [geometry] if isinstance(geometry, PolygonGeom) else list(geometry)
    for part in parts:
        for pid in fmap.index.query(part.bbox):
            if polygons_intersect(part, fmap.polygons[int(pid)]):
                return True
    return False
