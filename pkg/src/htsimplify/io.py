"""Reading and writing polylines (GeoJSON, WKT, CSV) and SVG rendering."""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence
from xml.etree import ElementTree as ET

from .exceptions import EmptyInput, InvalidPolyline, ParseError, UnsupportedGeometry, WriteFailure
from .geometry import Polyline, as_polyline
from .scaling import RankSize

FORMATS = ("geojson", "wkt", "csv")

_EXTENSIONS = {
    ".geojson": "geojson",
    ".json": "geojson",
    ".wkt": "wkt",
    ".txt": "wkt",
    ".csv": "csv",
}


@dataclass(frozen=True)
class Feature:
    id: str
    line: Polyline
    properties: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FeatureSet:
    features: tuple[Feature, ...] = ()

    def __post_init__(self):
        ids = [f.id for f in self.features]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ValueError(f"duplicate feature id {dup!r}")

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @classmethod
    def from_lines(cls, lines: Iterable, ids: Sequence[str] | None = None) -> "FeatureSet":
        lines = list(lines)
        ids = [str(i) for i in range(len(lines))] if ids is None else list(ids)
        return cls(tuple(Feature(i, as_polyline(l)) for i, l in zip(ids, lines)))


def infer_format(path) -> str:
    ext = Path(path).suffix.lower()
    try:
        return _EXTENSIONS[ext]
    except KeyError:
        raise ValueError(f"cannot infer format from extension {ext!r}; pass one of {FORMATS}") from None


def _fmt(value: float) -> str:
    # repr gives the shortest string that round-trips
    return repr(float(value))


def _line_or_error(coords, **where) -> Polyline:
    try:
        return Polyline(coords)
    except InvalidPolyline as exc:
        raise ParseError(str(exc), **where) from None


# ---------------------------------------------------------------- GeoJSON

def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"coordinate must be a number, got {type(v).__name__}", where=where)
    if not math.isfinite(v):
        raise ParseError("coordinate must be finite", where=where)
    return float(v)


def _coords(raw, where):
    if not isinstance(raw, list):
        raise ParseError("coordinates must be an array", where=where)
    out = []
    for k, pos in enumerate(raw):
        w = f"{where}[{k}]"
        if not isinstance(pos, list) or len(pos) < 2:
            raise ParseError("position must be an array of at least 2 numbers", where=w)
        out.append((_number(pos[0], w), _number(pos[1], w)))
    return _line_or_error(out, where=where)


def _reject_constant(name):
    raise ValueError(f"{name} is not valid JSON")


def _parse_geojson(text: str, strict: bool) -> FeatureSet:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    except (ValueError, RecursionError) as exc:
        raise ParseError(str(exc) or type(exc).__name__) from None

    if not isinstance(doc, dict):
        raise ParseError("top-level GeoJSON value must be an object", where="$")
    kind = doc.get("type")
    if kind == "FeatureCollection":
        raw_features = doc.get("features")
        if not isinstance(raw_features, list):
            raise ParseError("FeatureCollection needs a 'features' array", where="$.features")
        items = [(f"$.features[{k}]", f) for k, f in enumerate(raw_features)]
    elif kind == "Feature":
        items = [("$", doc)]
    elif kind in ("LineString", "MultiLineString"):
        items = [("$", {"type": "Feature", "geometry": doc, "properties": None})]
    else:
        raise ParseError(f"unsupported GeoJSON type {kind!r}", where="$.type")

    out: list[Feature] = []
    seen: set[str] = set()
    for k, (where, feat) in enumerate(items):
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise ParseError("expected a Feature object", where=where)
        fid = feat.get("id")
        fid = str(k) if fid is None else str(fid)
        props = feat.get("properties") or {}
        if not isinstance(props, dict):
            raise ParseError("properties must be an object", where=f"{where}.properties")
        props = {str(key): val if isinstance(val, str) else json.dumps(val) for key, val in props.items()}
        geom = feat.get("geometry")
        if not isinstance(geom, dict):
            raise ParseError("missing geometry object", where=f"{where}.geometry")
        gtype = geom.get("type")
        gwhere = f"{where}.geometry.coordinates"
        if gtype == "LineString":
            parts = [(fid, _coords(geom.get("coordinates"), gwhere))]
        elif gtype == "MultiLineString":
            raw = geom.get("coordinates")
            if not isinstance(raw, list):
                raise ParseError("coordinates must be an array", where=gwhere)
            parts = [(f"{fid}#{p}", _coords(r, f"{gwhere}[{p}]")) for p, r in enumerate(raw)]
        else:
            err = UnsupportedGeometry(f"unsupported geometry type {gtype!r}", where=f"{where}.geometry.type")
            if strict:
                raise err
            warnings.warn(str(err), stacklevel=3)
            continue
        for pid, line in parts:
            if pid in seen:
                raise ParseError(f"duplicate feature id {pid!r}", where=where)
            seen.add(pid)
            out.append(Feature(pid, line, dict(props)))
    return FeatureSet(tuple(out))


def _dump_geojson(fs: FeatureSet) -> str:
    feats = []
    for f in fs:
        feats.append({
            "type": "Feature",
            "id": f.id,
            "properties": dict(f.properties),
            "geometry": {"type": "LineString", "coordinates": f.line.coords.tolist()},
        })
    return json.dumps({"type": "FeatureCollection", "features": feats}, allow_nan=False) + "\n"


# ---------------------------------------------------------------- WKT

_WKT_RE = re.compile(
    r"""\s*LINESTRING\s*\((?P<body>[^()]*)\)\s*$""",
    re.IGNORECASE,
)
_OTHER_WKT = {
    "POINT", "MULTIPOINT", "POLYGON", "MULTIPOLYGON", "MULTILINESTRING", "LINEARRING",
    "GEOMETRYCOLLECTION", "TRIANGLE", "TIN", "POLYHEDRALSURFACE", "CIRCULARSTRING",
}
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PAIR_RE = re.compile(rf"^\s*({_NUM})\s+({_NUM})(?:\s+{_NUM}){{0,2}}\s*$")


def _parse_wkt(text: str, strict: bool) -> FeatureSet:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _WKT_RE.match(raw)
        if m is None:
            word = (raw.split("(")[0].split() or [""])[0].upper()
            if word in _OTHER_WKT:
                err = UnsupportedGeometry(f"unsupported WKT geometry {word!r}", line=lineno, column=1)
                if strict:
                    raise err
                warnings.warn(str(err), stacklevel=3)
                continue
            col = _first_bad_column(raw)
            raise ParseError("expected LINESTRING (x y, ...)", line=lineno, column=col)
        body = m.group("body")
        body_col = m.start("body") + 1
        pts = []
        offset = 0
        for chunk in body.split(","):
            pm = _PAIR_RE.match(chunk)
            if pm is None:
                raise ParseError(f"bad coordinate pair {chunk.strip()!r}", line=lineno, column=body_col + offset)
            pts.append((float(pm.group(1)), float(pm.group(2))))
            offset += len(chunk) + 1
        if any(not math.isfinite(c) for p in pts for c in p):
            raise ParseError("coordinate overflows to infinity", line=lineno, column=body_col)
        out.append(Feature(str(len(out)), _line_or_error(pts, line=lineno, column=1)))
    return FeatureSet(tuple(out))


def _first_bad_column(raw: str) -> int:
    m = re.match(r"\s*LINESTRING\s*\(?", raw, re.IGNORECASE)
    return (m.end() if m else len(raw) - len(raw.lstrip())) + 1


def _dump_wkt(fs: FeatureSet) -> str:
    rows = []
    for f in fs:
        body = ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in f.line.coords.tolist())
        rows.append(f"LINESTRING ({body})")
    return "".join(r + "\n" for r in rows)


# ---------------------------------------------------------------- CSV

def _parse_csv(text: str, strict: bool) -> FeatureSet:
    reader = csv.reader(_stdio.StringIO(text, newline=""))
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}", line=reader.line_num, column=1) from None
    pts = []
    first = True
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2:
            raise ParseError("expected two columns x,y", line=lineno, column=1)
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            if first:
                first = False
                continue  # header
            col = 1 if _is_bad_float(row[0]) else len(row[0]) + 2
            raise ParseError(f"non-numeric coordinate in row {row!r}", line=lineno, column=col) from None
        first = False
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("coordinates must be finite", line=lineno, column=1)
        pts.append((x, y))
    if not pts:
        return FeatureSet(())
    return FeatureSet((Feature("0", _line_or_error(pts, line=len(rows), column=1)),))


def _is_bad_float(s: str) -> bool:
    try:
        float(s)
        return False
    except ValueError:
        return True


def _dump_csv(fs: FeatureSet) -> str:
    if len(fs) > 1:
        raise WriteFailure("CSV holds a single polyline; got %d features" % len(fs))
    buf = ["x,y\n"]
    for f in fs:
        buf.extend(f"{_fmt(x)},{_fmt(y)}\n" for x, y in f.line.coords.tolist())
    return "".join(buf)


_PARSERS = {"geojson": _parse_geojson, "wkt": _parse_wkt, "csv": _parse_csv}
_DUMPERS = {"geojson": _dump_geojson, "wkt": _dump_wkt, "csv": _dump_csv}


def parse_features(data: str | bytes, format: str, strict: bool = False) -> FeatureSet:
    if format not in _PARSERS:
        raise ValueError(f"unknown format {format!r}; choose from {FORMATS}")
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}", column=exc.start + 1) from None
    if "\x00" in data:
        pos = data.index("\x00")
        line = data.count("\n", 0, pos) + 1
        raise ParseError("NUL byte in text input", line=line, column=pos - data.rfind("\n", 0, pos))
    return _PARSERS[format](data, strict)


def read_features(path, format: str | None = None, strict: bool = False) -> FeatureSet:
    """Load polylines from ``path``.

    MultiLineString parts become separate features with ids ``<id>#<k>``.
    WKT and CSV carry no ids; features are numbered from ``"0"``.
    Unsupported geometries are skipped with a warning, or raise
    :class:`UnsupportedGeometry` when ``strict``.
    """
    format = format or infer_format(path)
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_features(data, format, strict)
    except ParseError as exc:
        exc.path = str(path)
        exc.args = (exc._format(),)
        raise


def dumps_features(fs: FeatureSet, format: str) -> str:
    if format not in _DUMPERS:
        raise ValueError(f"unknown format {format!r}; choose from {FORMATS}")
    return _DUMPERS[format](fs)


def write_features(fs: FeatureSet, path, format: str | None = None) -> None:
    format = format or infer_format(path)
    text = dumps_features(fs, format)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise WriteFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------- SVG

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _write_svg(root: ET.Element, path) -> None:
    ET.indent(root)
    data = ET.tostring(root, encoding="unicode", xml_declaration=False)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
            fh.write(data + "\n")
    except OSError as exc:
        raise WriteFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def _svg_root(width, height):
    return ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "version": "1.1",
        "width": str(width),
        "height": str(height),
        "viewBox": f"0 0 {width} {height}",
    })


def render_svg(lines, path, width: int = 800, height: int = 600, margin: int = 20) -> None:
    """Draw polylines into an SVG file, north up, aspect ratio preserved.

    ``lines`` holds polylines or ``(polyline, style)`` pairs, where style
    may set ``stroke``, ``stroke-width`` and ``opacity``.
    """
    items = []
    for k, item in enumerate(lines):
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], dict):
            line, style = item
        else:
            line, style = item, {}
        items.append((as_polyline(line), {"stroke": _PALETTE[k % len(_PALETTE)], **style}))
    if not items:
        raise EmptyInput("nothing to render")

    xs = [c for l, _ in items for c in l.coords[:, 0].tolist()]
    ys = [c for l, _ in items for c in l.coords[:, 1].tolist()]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    scale = min((width - 2 * margin) / (x1 - x0 or span), (height - 2 * margin) / (y1 - y0 or span))
    ox = margin + ((width - 2 * margin) - (x1 - x0) * scale) / 2
    oy = margin + ((height - 2 * margin) - (y1 - y0) * scale) / 2

    root = _svg_root(width, height)
    for line, style in items:
        pts = [f"{ox + (x - x0) * scale:.4f} {oy + (y1 - y) * scale:.4f}" for x, y in line.coords.tolist()]
        attrs = {
            "d": "M " + " L ".join(pts),
            "fill": "none",
            "stroke": str(style.get("stroke")),
            "stroke-width": str(style.get("stroke-width", 1.5)),
        }
        if "opacity" in style:
            attrs["opacity"] = str(style["opacity"])
        ET.SubElement(root, "path", attrs)
    _write_svg(root, path)


def render_rank_size(series, path, width: int = 640, height: int = 480, margin: int = 50) -> None:
    """Rank-size plot: linear rank axis, logarithmic size axis.

    ``series`` is a :class:`RankSize`, a list of them, or ``(label, RankSize)``
    pairs. Each series becomes one connecting polyline plus one circle
    marker per item. Zero sizes sit on the bottom edge.
    """
    if isinstance(series, RankSize):
        series = [series]
    items = []
    for k, s in enumerate(series):
        label, rs = s if isinstance(s, tuple) else (f"series {k}", s)
        items.append((str(label), rs))
    if not items or any(len(rs) == 0 for _, rs in items):
        raise EmptyInput("nothing to plot")

    max_rank = max(int(rs.ranks[-1]) for _, rs in items)
    positive = [v for _, rs in items for v in rs.sizes.tolist() if v > 0]
    lo = math.log10(min(positive)) if positive else 0.0
    hi = math.log10(max(positive)) if positive else 1.0
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pw, ph = width - 2 * margin, height - 2 * margin

    def px(rank):
        return margin + (0.5 if max_rank == 1 else (rank - 1) / (max_rank - 1)) * pw

    def py(size):
        if size <= 0:
            return margin + ph
        return margin + (hi - math.log10(size)) / (hi - lo) * ph

    root = _svg_root(width, height)
    axes = ET.SubElement(root, "g", {"class": "axes", "stroke": "#444", "fill": "none"})
    ET.SubElement(axes, "path", {"d": f"M {margin} {margin} L {margin} {margin + ph} L {margin + pw} {margin + ph}"})
    for dec in range(math.floor(lo), math.ceil(hi) + 1):
        if lo - 1e-9 <= dec <= hi + 1e-9:
            y = py(10.0 ** dec)
            t = ET.SubElement(root, "text", {"x": str(margin - 6), "y": f"{y:.2f}", "text-anchor": "end", "font-size": "10"})
            t.text = f"1e{dec}"
    xl = ET.SubElement(root, "text", {"x": str(margin + pw / 2), "y": str(height - 12), "text-anchor": "middle", "font-size": "12"})
    xl.text = "rank"
    yl = ET.SubElement(root, "text", {"x": "14", "y": str(margin + ph / 2), "font-size": "12",
                                      "transform": f"rotate(-90 14 {margin + ph / 2})", "text-anchor": "middle"})
    yl.text = "size (log)"

    for k, (label, rs) in enumerate(items):
        color = _PALETTE[k % len(_PALETTE)]
        g = ET.SubElement(root, "g", {"class": "series", "data-label": label, "stroke": color, "fill": color})
        coords = [(px(r), py(v)) for r, v in zip(rs.ranks.tolist(), rs.sizes.tolist())]
        ET.SubElement(g, "polyline", {"points": " ".join(f"{x:.3f},{y:.3f}" for x, y in coords), "fill": "none"})
        for (x, y), (r, v) in zip(coords, zip(rs.ranks.tolist(), rs.sizes.tolist())):
            c = ET.SubElement(g, "circle", {"class": "marker", "cx": f"{x:.3f}", "cy": f"{y:.3f}", "r": "3"})
            c.set("data-rank", str(r))
            c.set("data-size", _fmt(v))
    _write_svg(root, path)
