"""Input parsing and validation.

Four datasets come in: floodplain polygons (GeoJSON), CBG boundaries
(GeoJSON, keyed by the ``cbg_id`` property), CBG demographics (CSV), home
assignments (CSV), and stay records (CSV). All tabular input is UTF-8,
comma-separated, with a required header row; field whitespace is trimmed.

Fatal problems (unparseable file, wrong header, duplicate keys) raise
:class:`IngestError` naming the file and record. Per-row/per-feature
problems reject just that row and are counted in the returned
:class:`LoadReport`.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from floodmob.geo import (
    CbgLocator,
    FloodplainMap,
    GeometryError,
    GeoPoint,
    PolygonGeom,
    locate_points,
)

log = logging.getLogger(__name__)

WEEK_MINUTES = 10080
# April 1-7, 2019 UTC, in epoch minutes
DEFAULT_WINDOW_START = 25_901_280

DEMOGRAPHICS_HEADER = [
    "cbg_id",
    "county_id",
    "state",
    "median_income",
    "pop_total",
    "pop_white",
    "pop_black",
    "pop_asian",
    "pop_25plus",
    "pop_25plus_low_attainment",
]
STAYS_HEADER = ["device_id", "lon", "lat", "start_epoch_min", "dwell_min"]
HOMES_HEADER = ["device_id", "home_cbg"]


class IngestError(ValueError):
    """Fatal input problem; message names the offending file and record."""


@dataclass(frozen=True)
class StudyWindow:
    start: float  # epoch minutes
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise IngestError(f"study window end ({self.end}) must exceed start ({self.start})")

    @property
    def total_minutes(self) -> float:
        return self.end - self.start

    @classmethod
    def default_week(cls) -> "StudyWindow":
        return cls(DEFAULT_WINDOW_START, DEFAULT_WINDOW_START + WEEK_MINUTES)


@dataclass
class CbgRecord:
    cbg_id: str
    county_id: str
    state: str
    geometry: tuple[PolygonGeom, ...]
    median_income: Optional[float]
    pop_total: int
    pop_white: int
    pop_black: int
    pop_asian: int
    pop_25plus: int
    pop_25plus_low_attainment: int
    flood_prone: bool = False  # derived from the floodplain overlay


@dataclass(frozen=True)
class StayRecord:
    device_id: str
    location: GeoPoint
    start: float  # epoch minutes
    dwell_min: float
    stay_cbg: Optional[str]


@dataclass(frozen=True)
class HomeAssignment:
    device_id: str
    home_cbg: str


@dataclass
class LoadReport:
    source: str
    n_loaded: int = 0
    n_rejected: int = 0
    n_filtered: int = 0  # dropped by an explicit filter, not by validation
    reasons: dict = field(default_factory=dict)

    def reject(self, reason: str, locator: str):
        self.n_rejected += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1
        log.warning("%s: rejected %s (%s)", self.source, locator, reason)


# ---------------------------------------------------------------------------
# GeoJSON geometry
# ---------------------------------------------------------------------------


def _parse_geojson(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise IngestError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: expected a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise IngestError(f"{path}: FeatureCollection has no feature list")
    return features


def _feature_polygons(geom: dict) -> list[PolygonGeom]:
    """Validate one feature geometry; returns one PolygonGeom per part.

    Rings must be explicitly closed per the GeoJSON spec; an open ring
    invalidates the whole feature.
    """
    if not isinstance(geom, dict):
        raise GeometryError("missing geometry")
    gtype = geom.get("type")
    if gtype == "Polygon":
        parts = [geom.get("coordinates")]
    elif gtype == "MultiPolygon":
        parts = geom.get("coordinates")
    else:
        raise GeometryError(f"unsupported geometry type {gtype!r}")
    if not isinstance(parts, list) or not parts:
        raise GeometryError("empty coordinates")
    out = []
    for rings in parts:
        if not isinstance(rings, list) or not rings:
            raise GeometryError("polygon without rings")
        cleaned = []
        for ring in rings:
            if not isinstance(ring, list) or len(ring) < 4:
                raise GeometryError("ring with fewer than 4 positions")
            pts = []
            for pos in ring:
                if not isinstance(pos, (list, tuple)) or len(pos) < 2:
                    raise GeometryError("position is not a [lon, lat] pair")
                lon, lat = float(pos[0]), float(pos[1])
                if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
                    raise GeometryError(f"coordinate out of range: ({lon}, {lat})")
                pts.append((lon, lat))
            if pts[0] != pts[-1]:
                raise GeometryError("open ring (first position != last)")
            cleaned.append(pts)
        out.append(PolygonGeom(cleaned[0], holes=cleaned[1:]))
    return out


def load_floodplain(
    path: str, zone_filter: Optional[Callable[[dict], bool]] = None
) -> tuple[FloodplainMap, LoadReport]:
    """Parse floodplain polygons and build the indexed hazard layer.

    zone_filter, when given, is a predicate over the feature properties;
    features failing it are dropped (counted as filtered, not rejected).
    MultiPolygon parts become separate entries in the map.
    """
    report = LoadReport(source=path)
    polygons: list[PolygonGeom] = []
    for i, feat in enumerate(_parse_geojson(path)):
        props = feat.get("properties") or {}
        if zone_filter is not None and not zone_filter(props):
            report.n_filtered += 1
            continue
        try:
            parts = _feature_polygons(feat.get("geometry"))
        except (GeometryError, TypeError, ValueError) as exc:
            report.reject(str(exc), f"feature {i}")
            continue
        polygons.extend(parts)
        report.n_loaded += 1
    return FloodplainMap(polygons), report


def _load_cbg_geometry(path: str, report: LoadReport) -> dict[str, tuple[PolygonGeom, ...]]:
    geoms: dict[str, tuple[PolygonGeom, ...]] = {}
    for i, feat in enumerate(_parse_geojson(path)):
        props = feat.get("properties") or {}
        cbg_id = props.get("cbg_id")
        if not isinstance(cbg_id, str) or not cbg_id.strip():
            report.reject("feature without cbg_id property", f"feature {i}")
            continue
        cbg_id = cbg_id.strip()
        if cbg_id in geoms:
            raise IngestError(f"{path}: duplicate cbg_id {cbg_id!r} (feature {i})")
        try:
            parts = _feature_polygons(feat.get("geometry"))
        except (GeometryError, TypeError, ValueError) as exc:
            report.reject(str(exc), f"feature {i} ({cbg_id})")
            continue
        geoms[cbg_id] = tuple(parts)
    return geoms


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------


def _open_csv(path: str, expected_header: list[str], optional_tail: Sequence[str] = ()):
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise IngestError(f"{path}: file not found")
    reader = csv.reader(fh)
    try:
        header = [c.strip() for c in next(reader)]
    except StopIteration:
        fh.close()
        raise IngestError(f"{path}: empty file, expected header row")
    valid = [expected_header + list(optional_tail[:k]) for k in range(len(optional_tail) + 1)]
    if header not in valid:
        fh.close()
        raise IngestError(
            f"{path}: bad header {header!r}, expected {','.join(expected_header)}"
            + (f"[,{','.join(optional_tail)}]" if optional_tail else "")
        )
    return fh, reader, header


def _count_field(raw: str, name: str) -> int:
    value = int(raw)
    if value < 0:
        raise ValueError(f"negative {name}")
    return value


def load_cbgs(geometry_path: str, demographics_path: str) -> tuple[list[CbgRecord], LoadReport]:
    """Inner join of CBG geometry and demographics on cbg_id.

    Records missing either side are reported and dropped. Blank
    median_income is kept as absent (the CBG is excluded from income
    cohorts only).
    """
    report = LoadReport(source=f"{geometry_path} + {demographics_path}")
    geoms = _load_cbg_geometry(geometry_path, report)

    fh, reader, _ = _open_csv(demographics_path, DEMOGRAPHICS_HEADER)
    rows: dict[str, dict] = {}
    with fh:
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            cells = [c.strip() for c in raw]
            if len(cells) != len(DEMOGRAPHICS_HEADER):
                report.reject("wrong column count", f"{demographics_path}:{lineno}")
                continue
            row = dict(zip(DEMOGRAPHICS_HEADER, cells))
            cbg_id = row["cbg_id"]
            if not cbg_id:
                report.reject("blank cbg_id", f"{demographics_path}:{lineno}")
                continue
            if cbg_id in rows:
                raise IngestError(
                    f"{demographics_path}:{lineno}: duplicate cbg_id {cbg_id!r}"
                )
            try:
                income = float(row["median_income"]) if row["median_income"] else None
                if income is not None and income < 0:
                    raise ValueError("negative median_income")
                counts = {
                    name: _count_field(row[name], name)
                    for name in DEMOGRAPHICS_HEADER[4:]
                }
            except ValueError as exc:
                report.reject(f"bad numeric field ({exc})", f"{demographics_path}:{lineno}")
                continue
            if max(counts["pop_white"], counts["pop_black"], counts["pop_asian"]) > counts["pop_total"]:
                report.reject("race count exceeds pop_total", f"{demographics_path}:{lineno}")
                continue
            if counts["pop_25plus_low_attainment"] > counts["pop_25plus"]:
                report.reject(
                    "pop_25plus_low_attainment exceeds pop_25plus",
                    f"{demographics_path}:{lineno}",
                )
                continue
            rows[cbg_id] = {
                "county_id": row["county_id"],
                "state": row["state"],
                "median_income": income,
                **counts,
            }

    records = []
    for cbg_id in sorted(set(geoms) & set(rows)):
        row = rows[cbg_id]
        records.append(CbgRecord(cbg_id=cbg_id, geometry=geoms[cbg_id], **row))
    for cbg_id in sorted(set(geoms) - set(rows)):
        report.reject("no demographics row", cbg_id)
    for cbg_id in sorted(set(rows) - set(geoms)):
        report.reject("no geometry feature", cbg_id)
    report.n_loaded = len(records)
    return records, report


def build_locator(cbgs: Sequence[CbgRecord]) -> CbgLocator:
    return CbgLocator((c.cbg_id, list(c.geometry)) for c in cbgs)


def load_stays(
    path: str,
    window: StudyWindow,
    cbgs,
    workers: int = 1,
) -> tuple[list[StayRecord], LoadReport]:
    """Parse stay records, enforcing window containment and positive dwell.

    ``cbgs`` is a CbgLocator or a sequence of CbgRecord. When the optional
    stay_cbg column is absent, it is derived by point location; rows whose
    point lies in no CBG keep stay_cbg = None but are retained, since they
    can still be floodplain-classified.
    """
    locator = cbgs if isinstance(cbgs, CbgLocator) else build_locator(cbgs)
    report = LoadReport(source=path)
    fh, reader, header = _open_csv(path, STAYS_HEADER, optional_tail=("stay_cbg",))
    has_cbg_col = len(header) == 6

    parsed: list[tuple] = []
    with fh:
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            cells = [c.strip() for c in raw]
            if len(cells) != len(header):
                report.reject("wrong column count", f"{path}:{lineno}")
                continue
            device_id = cells[0]
            if not device_id:
                report.reject("blank device_id", f"{path}:{lineno}")
                continue
            try:
                lon = float(cells[1])
                lat = float(cells[2])
                point = GeoPoint(lon, lat)
            except (ValueError, GeometryError):
                report.reject("unparseable coordinate", f"{path}:{lineno}")
                continue
            try:
                start = float(cells[3])
                dwell = float(cells[4])
            except ValueError:
                report.reject("unparseable time field", f"{path}:{lineno}")
                continue
            if dwell <= 0:
                report.reject("non-positive dwell_min", f"{path}:{lineno}")
                continue
            if start < window.start or start >= window.end or start + dwell > window.end:
                report.reject("outside study window", f"{path}:{lineno}")
                continue
            stay_cbg = (cells[5] or None) if has_cbg_col else None
            parsed.append((device_id, point, start, dwell, stay_cbg))

    if has_cbg_col:
        stays = [StayRecord(*row) for row in parsed]
    else:
        lons = [row[1].lon for row in parsed]
        lats = [row[1].lat for row in parsed]
        located = locate_points(lons, lats, locator, workers=workers)
        stays = [
            StayRecord(dev, pt, start, dwell, cbg)
            for (dev, pt, start, dwell, _), cbg in zip(parsed, located)
        ]
    report.n_loaded = len(stays)
    return stays, report


def load_homes(path: str, cbgs) -> tuple[list[HomeAssignment], LoadReport]:
    """Parse device home assignments.

    Duplicate device rows with the same home are deduplicated; conflicting
    homes for one device are a fatal integrity error. Devices homed in an
    unknown CBG are dropped and counted.
    """
    known = (
        set(cbgs.cbg_ids) if isinstance(cbgs, CbgLocator) else {c.cbg_id for c in cbgs}
    )
    report = LoadReport(source=path)
    fh, reader, _ = _open_csv(path, HOMES_HEADER)
    seen: dict[str, str] = {}
    with fh:
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            cells = [c.strip() for c in raw]
            if len(cells) != 2:
                report.reject("wrong column count", f"{path}:{lineno}")
                continue
            device_id, home_cbg = cells
            if not device_id or not home_cbg:
                report.reject("blank field", f"{path}:{lineno}")
                continue
            if device_id in seen:
                if seen[device_id] != home_cbg:
                    raise IngestError(
                        f"{path}:{lineno}: device {device_id!r} listed with conflicting "
                        f"homes {seen[device_id]!r} and {home_cbg!r}"
                    )
                continue  # exact duplicate, ignore
            seen[device_id] = home_cbg

    assignments = []
    for device_id in sorted(seen):
        home_cbg = seen[device_id]
        if home_cbg not in known:
            report.reject("home_cbg not in CBG table", device_id)
            continue
        assignments.append(HomeAssignment(device_id, home_cbg))
    report.n_loaded = len(assignments)
    return assignments, report


def make_zone_filter(allowed: Sequence[str]) -> Callable[[dict], bool]:
    """Predicate keeping features whose ``zone`` property is in ``allowed``."""
    allowed_set = {z.strip() for z in allowed if z.strip()}

    def predicate(props: dict) -> bool:
        return str(props.get("zone", "")).strip() in allowed_set

    return predicate
