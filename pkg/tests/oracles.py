"""Independent oracles for the test suite.

Everything here is written from first principles against the documented file
formats and definitions, deliberately NOT sharing code with the package under
test. Containment semantics match the artifact's convention: boundary points
count as inside.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction

import numpy as np

WEEK_MINUTES = 10080


# ---------------------------------------------------------------------------
# Point-in-polygon (scalar and vectorized ray casting)
# ---------------------------------------------------------------------------


def _ring_edges(ring):
    """Ring as a list of (x1, y1, x2, y2) edges, wrapping around."""
    pts = [tuple(p) for p in ring]
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    n = len(pts)
    return [(pts[i][0], pts[i][1], pts[(i + 1) % n][0], pts[(i + 1) % n][1]) for i in range(n)]


def on_ring(ring, x, y) -> bool:
    for x1, y1, x2, y2 in _ring_edges(ring):
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if cross == 0 and min(x1, x2) <= x <= max(x1, x2) and min(y1, y2) <= y <= max(y1, y2):
            return True
    return False


def strictly_in_ring(ring, x, y) -> bool:
    c = False
    for x1, y1, x2, y2 in _ring_edges(ring):
        if (y1 <= y < y2) or (y2 <= y < y1):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                c = not c
    return c


def ray_cast_inside(exterior, holes, x, y) -> bool:
    """Boundary-inclusive membership in a polygon with holes."""
    if on_ring(exterior, x, y):
        return True
    if not strictly_in_ring(exterior, x, y):
        return False
    for hole in holes:
        if on_ring(hole, x, y):
            return True
        if strictly_in_ring(hole, x, y):
            return False
    return True


def _ring_hit_vec(ring, xs, ys):
    """Vectorized tri-state (0 out / 1 in / 2 boundary) for one ring."""
    ring = np.asarray(ring, dtype=np.float64)
    x1 = ring[:-1, 0][:, None]
    y1 = ring[:-1, 1][:, None]
    x2 = ring[1:, 0][:, None]
    y2 = ring[1:, 1][:, None]
    xs = np.asarray(xs, dtype=np.float64)[None, :]
    ys = np.asarray(ys, dtype=np.float64)[None, :]
    in_bb = (
        (np.minimum(x1, x2) <= xs)
        & (xs <= np.maximum(x1, x2))
        & (np.minimum(y1, y2) <= ys)
        & (ys <= np.maximum(y1, y2))
    )
    cross = (x2 - x1) * (ys - y1) - (y2 - y1) * (xs - x1)
    boundary = (in_bb & (cross == 0.0)).any(axis=0)
    straddles = (y1 > ys) != (y2 > ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
    crossings = (straddles & (xs < xc)).sum(axis=0)
    out = (crossings % 2).astype(np.int8)
    out[boundary] = 2
    return out


def polygon_hit_vec(exterior, holes, xs, ys):
    """Vectorized boundary-inclusive membership for one polygon."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    hit = _ring_hit_vec(exterior, xs, ys)
    result = hit > 0
    # points strictly inside the exterior can still be excluded by a hole;
    # a point ON a hole ring stays inside (boundary-inclusive)
    active = hit == 1
    for hole in holes:
        if not active.any():
            break
        idx = np.where(active)[0]
        hh = _ring_hit_vec(hole, xs[idx], ys[idx])
        result[idx[hh == 1]] = False
        active[idx[hh != 0]] = False
    return result


def classify_brute(xs, ys, polygons) -> np.ndarray:
    """Brute-force OR over every polygon; polygons are (exterior, holes) pairs."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    verdict = np.zeros(xs.shape[0], dtype=bool)
    for exterior, holes in polygons:
        ext = np.asarray(exterior, dtype=np.float64)
        minx, miny = ext.min(axis=0)
        maxx, maxy = ext.max(axis=0)
        cand = ~verdict & (xs >= minx) & (xs <= maxx) & (ys >= miny) & (ys <= maxy)
        if not cand.any():
            continue
        verdict[cand] = polygon_hit_vec(exterior, holes, xs[cand], ys[cand])
    return verdict


# ---------------------------------------------------------------------------
# Rectangle scan and polygon-intersection sampling
# ---------------------------------------------------------------------------


def bbox_scan(rects, query) -> set:
    """All-pairs scan: indices of rects intersecting the query rect."""
    qx0, qy0, qx1, qy1 = query
    hits = set()
    for i, (x0, y0, x1, y1) in enumerate(rects):
        if not (x1 < qx0 or qx1 < x0 or y1 < qy0 or qy1 < y0):
            hits.add(i)
    return hits


def polys_intersect_grid(a, b, n=100):
    """Dense-sampling intersection check over the bbox overlap of polygons
    a, b ((exterior, holes) pairs). Returns (verdict, cell_area): a False
    verdict only rules out intersections larger than one grid cell."""
    ea = np.asarray(a[0], dtype=np.float64)
    eb = np.asarray(b[0], dtype=np.float64)
    x0 = max(ea[:, 0].min(), eb[:, 0].min())
    x1 = min(ea[:, 0].max(), eb[:, 0].max())
    y0 = max(ea[:, 1].min(), eb[:, 1].min())
    y1 = min(ea[:, 1].max(), eb[:, 1].max())
    if x1 < x0 or y1 < y0:
        return False, 0.0
    gx, gy = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    xs = gx.ravel()
    ys = gy.ravel()
    in_a = polygon_hit_vec(a[0], a[1], xs, ys)
    if not in_a.any():
        return False, ((x1 - x0) / (n - 1)) * ((y1 - y0) / (n - 1))
    in_b = polygon_hit_vec(b[0], b[1], xs[in_a], ys[in_a])
    cell = ((x1 - x0) / max(n - 1, 1)) * ((y1 - y0) / max(n - 1, 1))
    return bool(in_b.any()), cell


# ---------------------------------------------------------------------------
# Statistics references
# ---------------------------------------------------------------------------


def welch_reference(a, b):
    """scipy's Welch t-test (statistic, two-sided p)."""
    from scipy import stats

    res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(res.pvalue)


def ols_reference(xs, ys):
    """Normal-equations least squares via numpy lstsq."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    design = np.column_stack([np.ones_like(xs), xs])
    coef, _, _, _ = np.linalg.lstsq(design, ys, rcond=None)
    pred = design @ coef
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[1]), float(coef[0]), r2


# ---------------------------------------------------------------------------
# Definition-level exposure recomputation from emitted scenario files
# ---------------------------------------------------------------------------


def _load_geojson_polys(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for feat in doc["features"]:
        geom = feat["geometry"]
        props = feat.get("properties") or {}
        if geom["type"] == "Polygon":
            parts = [geom["coordinates"]]
        else:
            parts = geom["coordinates"]
        polys = [(rings[0], rings[1:]) for rings in parts]
        out.append((props, polys))
    return out


def recompute_exposures(scenario_dir, window_total=WEEK_MINUTES):
    """Recompute per-CBG exposures from the emitted CSV/GeoJSON files using
    Fraction arithmetic and the scalar ray caster. Returns
    {cbg_id: {"e_m": Fraction, "e_r_cbg_gated": Fraction,
              "e_r_stop_gated": Fraction, "n_devices": int}}.
    """
    scenario_dir = str(scenario_dir)
    flood = [p for _, polys in _load_geojson_polys(f"{scenario_dir}/floodplain.geojson") for p in polys]
    cbg_parts = {}
    for props, polys in _load_geojson_polys(f"{scenario_dir}/cbgs.geojson"):
        cbg_parts[props["cbg_id"]] = polys

    county = {}
    flood_prone = {}
    with open(f"{scenario_dir}/demographics.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            county[row["cbg_id"]] = row["county_id"]

    for cbg_id, parts in cbg_parts.items():
        prone = False
        for ext, holes in parts:
            ext_arr = np.asarray(ext, dtype=np.float64)
            # sample densely: grid verdicts vs every flood polygon
            for fp in flood:
                hit, _ = polys_intersect_grid((ext, holes), fp, n=40)
                if hit:
                    prone = True
                    break
            if prone:
                break
        flood_prone[cbg_id] = prone

    homes = {}
    with open(f"{scenario_dir}/homes.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            homes[row["device_id"]] = row["home_cbg"]

    def in_parts(parts, x, y):
        return any(ray_cast_inside(ext, holes, x, y) for ext, holes in parts)

    def in_flood(x, y):
        return any(ray_cast_inside(ext, holes, x, y) for ext, holes in flood)

    def locate(x, y):
        best = None
        for cbg_id in sorted(cbg_parts):
            if in_parts(cbg_parts[cbg_id], x, y):
                best = cbg_id
                break
        return best

    per_device = {}
    with open(f"{scenario_dir}/stays.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            dev = row["device_id"]
            if dev not in homes:
                continue
            home = homes[dev]
            x, y = float(row["lon"]), float(row["lat"])
            dwell = Fraction(row["dwell_min"])
            acc = per_device.setdefault(
                dev, {"home": home, "home_min": Fraction(0), "home_flood_min": Fraction(0), "mob_min": Fraction(0)}
            )
            if in_parts(cbg_parts[home], x, y):
                acc["home_min"] += dwell
                if in_flood(x, y):
                    acc["home_flood_min"] += dwell
            else:
                stay_cbg = locate(x, y)
                if stay_cbg is not None and county[stay_cbg] == county[home] and in_flood(x, y):
                    acc["mob_min"] += dwell

    result = {}
    for dev, acc in per_device.items():
        cbg_id = acc["home"]
        rec = result.setdefault(
            cbg_id,
            {"n_devices": 0, "mob": Fraction(0), "home": Fraction(0), "home_flood": Fraction(0)},
        )
        rec["n_devices"] += 1
        rec["mob"] += acc["mob_min"]
        rec["home"] += acc["home_min"]
        rec["home_flood"] += acc["home_flood_min"]

    out = {}
    for cbg_id, rec in result.items():
        den = rec["n_devices"] * window_total
        out[cbg_id] = {
            "n_devices": rec["n_devices"],
            "e_m": rec["mob"] / den,
            "e_r_cbg_gated": (rec["home"] / den) if flood_prone[cbg_id] else Fraction(0),
            "e_r_stop_gated": rec["home_flood"] / den,
        }
    return out
