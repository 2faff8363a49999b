import json
import math
import random
import warnings
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from htsimplify.exceptions import EmptyInput, ParseError, UnsupportedGeometry, WriteFailure
from htsimplify.geometry import Polyline
from htsimplify.io import (
    Feature,
    FeatureSet,
    dumps_features,
    parse_features,
    read_features,
    render_rank_size,
    render_svg,
    write_features,
)
from htsimplify.koch import koch_curve, triangle_inventory
from htsimplify.scaling import rank_size

SVG = "{http://www.w3.org/2000/svg}"


def test_csv_minimal(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,0\n1,0\n")
    fs = read_features(p)
    assert len(fs) == 1
    assert fs.features[0].line.coords.tolist() == [[0, 0], [1, 0]]


def test_csv_header_detected(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n0,0\n1,2.5\n")
    assert read_features(p).features[0].line.coords.tolist() == [[0, 0], [1, 2.5]]


def test_wkt_wedge(tmp_path):
    p = tmp_path / "a.wkt"
    p.write_text("LINESTRING (0 0, 1 1, 2 0)\n")
    line = read_features(p).features[0].line
    assert line.coords.tolist() == [[0, 0], [1, 1], [2, 0]]


def test_geojson_multilinestring(tmp_path):
    doc = {
        "type": "FeatureCollection",
        "features": [{
            "type": "Feature", "id": "f", "properties": {"name": "river"},
            "geometry": {"type": "MultiLineString", "coordinates": [[[0, 0], [1, 1]], [[2, 2], [3, 3], [4, 2]]]},
        }],
    }
    p = tmp_path / "a.geojson"
    p.write_text(json.dumps(doc))
    fs = read_features(p)
    assert [f.id for f in fs] == ["f#0", "f#1"]
    assert fs.features[1].properties == {"name": "river"}
    assert len(fs.features[1].line) == 3


def test_geojson_unsupported_geometry(tmp_path):
    doc = {"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {}, "geometry": {"type": "Point", "coordinates": [0, 0]}},
        {"type": "Feature", "properties": {}, "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 0]]}},
    ]}
    p = tmp_path / "a.geojson"
    p.write_text(json.dumps(doc))
    with pytest.warns(UserWarning, match="Point"):
        fs = read_features(p)
    assert [f.id for f in fs] == ["1"]
    with pytest.raises(UnsupportedGeometry):
        read_features(p, strict=True)


def test_wkt_unsupported_geometry(tmp_path):
    p = tmp_path / "a.wkt"
    p.write_text("POINT (1 2)\nLINESTRING (0 0, 1 0)\n")
    with pytest.warns(UserWarning):
        assert len(read_features(p)) == 1
    with pytest.raises(UnsupportedGeometry) as exc:
        read_features(p, strict=True)
    assert exc.value.line == 1


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_features(tmp_path / "nope.csv")


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_features("LINESTRING (0 0, 1 1)\nLINESTRING (0 0, 1 x)\n", "wkt")
    assert exc.value.line == 2 and exc.value.column is not None
    with pytest.raises(ParseError) as exc:
        parse_features('{"type": "FeatureCollection",\n "features": [}', "geojson")
    assert exc.value.line == 2
    with pytest.raises(ParseError) as exc:
        parse_features("x,y\n0,0\n1,abc\n", "csv")
    assert exc.value.line == 3
    with pytest.raises(ParseError) as exc:
        parse_features('{"type": "Feature", "geometry": {"type": "LineString", "coordinates": [[0, 0], ["a", 1]]}}',
                       "geojson")
    assert "coordinates[1]" in exc.value.where
    with pytest.raises(ParseError):
        parse_features('{"type": "LineString", "coordinates": [[0, NaN], [1, 1]]}', "geojson")
    with pytest.raises(ParseError):
        parse_features("LINESTRING (0 0)\n", "wkt")


@pytest.mark.parametrize("fmt", ["geojson", "wkt", "csv"])
def test_round_trip_wedge(tmp_path, fmt, wedge):
    fs = FeatureSet.from_lines([wedge])
    p = tmp_path / f"w.{fmt}"
    write_features(fs, p, fmt)
    back = read_features(p, fmt)
    assert back.features[0].line.coords.tolist() == [list(v) for v in wedge]


@pytest.mark.parametrize("fmt", ["geojson", "wkt", "csv"])
def test_empty_set(tmp_path, fmt):
    p = tmp_path / f"e.{fmt}"
    write_features(FeatureSet(()), p, fmt)
    assert len(read_features(p, fmt)) == 0
    if fmt == "geojson":
        assert json.loads(p.read_text()) == {"type": "FeatureCollection", "features": []}


def test_koch3_file(tmp_path):
    p = tmp_path / "k.wkt"
    write_features(FeatureSet.from_lines([koch_curve(3)]), p)
    assert p.read_text().count(",") == 64
    assert len(read_features(p).features[0].line) == 65


def test_csv_rejects_many_features(tmp_path):
    fs = FeatureSet.from_lines([[(0, 0), (1, 0)], [(0, 1), (1, 1)]])
    with pytest.raises(WriteFailure):
        write_features(fs, tmp_path / "m.csv")


def test_write_failure(tmp_path):
    with pytest.raises(WriteFailure):
        write_features(FeatureSet.from_lines([[(0, 0), (1, 0)]]), tmp_path / "missing" / "x.wkt")


def test_duplicate_ids_rejected():
    line = Polyline([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        FeatureSet((Feature("a", line), Feature("a", line)))


finite = st.floats(-1e9, 1e9, allow_nan=False, allow_infinity=False)
lines_st = st.lists(st.tuples(finite, finite), min_size=2, max_size=30).filter(
    lambda pts: len(Polyline(pts)) == len(pts) if _valid(pts) else False
)


def _valid(pts):
    try:
        Polyline(pts)
        return True
    except ValueError:
        return False


text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=12)


@given(st.lists(st.tuples(lines_st, st.dictionaries(text, text, max_size=3)), min_size=0, max_size=4))
@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
def test_geojson_round_trip(items):
    fs = FeatureSet(tuple(Feature(f"id{k}", Polyline(pts), props) for k, (pts, props) in enumerate(items)))
    back = parse_features(dumps_features(fs, "geojson"), "geojson")
    assert [f.id for f in back] == [f.id for f in fs]
    assert [f.properties for f in back] == [f.properties for f in fs]
    for a, b in zip(fs, back):
        np.testing.assert_allclose(a.line.coords, b.line.coords, rtol=0, atol=1e-12)


@given(st.lists(lines_st, min_size=0, max_size=4))
@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
def test_wkt_round_trip(lines):
    fs = FeatureSet.from_lines(lines)
    back = parse_features(dumps_features(fs, "wkt"), "wkt")
    assert [f.id for f in back] == [f.id for f in fs]
    for a, b in zip(fs, back):
        assert np.array_equal(a.line.coords, b.line.coords)


@given(lines_st)
@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
def test_csv_round_trip(pts):
    fs = FeatureSet.from_lines([pts])
    back = parse_features(dumps_features(fs, "csv"), "csv")
    assert np.array_equal(back.features[0].line.coords, fs.features[0].line.coords)


def _corpus():
    rng = random.Random(7)
    k3 = FeatureSet((Feature("k", koch_curve(2), {"a": "b"}),))
    docs = {
        "geojson": dumps_features(k3, "geojson"),
        "wkt": dumps_features(FeatureSet.from_lines([koch_curve(2), [(0, 0), (1, 1)]]), "wkt"),
        "csv": dumps_features(FeatureSet.from_lines([koch_curve(2)]), "csv"),
    }
    out = []
    for fmt, doc in docs.items():
        data = doc.encode()
        for _ in range(150):
            mode = rng.choice(["truncate", "flip", "delete", "insert"])
            b = bytearray(data)
            if mode == "truncate":
                b = b[: rng.randrange(1, len(b))]
            elif mode == "flip":
                for _ in range(rng.randint(1, 4)):
                    i = rng.randrange(len(b))
                    b[i] = rng.randrange(256)
            elif mode == "delete":
                i = rng.randrange(len(b))
                del b[i: i + rng.randint(1, 10)]
            else:
                i = rng.randrange(len(b))
                b[i:i] = bytes(rng.choice(b"{}[](),:;\"' -.eE0123456789abcNLINESTRING\n\x00") for _ in range(3))
            out.append((fmt, bytes(b)))
    return out


@pytest.mark.parametrize("fmt, data", _corpus())
def test_fuzz_corpus_never_crashes(fmt, data):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            fs = parse_features(data, fmt)
        except ParseError as exc:
            assert exc.line is not None or exc.column is not None or exc.where
            return
    for f in fs:
        assert len(f.line) >= 2 and np.all(np.isfinite(f.line.coords))


def _paths(path):
    return ET.parse(path).getroot().findall(f"{SVG}path")


def test_render_svg(tmp_path):
    p = tmp_path / "k.svg"
    render_svg([koch_curve(3)], p)
    paths = _paths(p)
    assert len(paths) == 1
    assert paths[0].get("d").count("L") == 64


def test_render_svg_overlay_and_north_up(tmp_path):
    p = tmp_path / "o.svg"
    line = koch_curve(2)
    render_svg([(line, {"stroke": "#000"}), (koch_curve(1), {"stroke": "red", "stroke-width": 3})], p)
    paths = _paths(p)
    assert [x.get("stroke") for x in paths] == ["#000", "red"]
    # apex (highest y) must be drawn at the smallest SVG y
    coords = [tuple(map(float, c.strip().split())) for c in paths[1].get("d")[2:].split("L")]
    assert min(coords, key=lambda c: c[1]) == coords[2]
    with pytest.raises(EmptyInput):
        render_svg([], p)


def test_render_svg_preserves_aspect(tmp_path):
    p = tmp_path / "sq.svg"
    render_svg([[(0, 0), (1, 0), (1, 1), (0, 1)]], p, width=800, height=400)
    pts = [tuple(map(float, c.strip().split())) for c in _paths(p)[0].get("d")[2:].split("L")]
    w = max(x for x, _ in pts) - min(x for x, _ in pts)
    h = max(y for _, y in pts) - min(y for _, y in pts)
    assert w == pytest.approx(h)


def test_render_rank_size(tmp_path):
    p = tmp_path / "rs.svg"
    render_rank_size(rank_size(triangle_inventory(3).values()), p)
    root = ET.parse(p).getroot()
    markers = root.findall(f".//{SVG}circle")
    assert len(markers) == 21
    top = min(markers, key=lambda m: float(m.get("cy")))
    assert top.get("data-rank") == "1"
    assert len(root.findall(f".//{SVG}polyline")) == 1


def test_render_rank_size_two_series(tmp_path):
    p = tmp_path / "rs2.svg"
    render_rank_size([("a", rank_size([3, 2, 1])), ("b", rank_size([0.5, 0.0]))], p)
    root = ET.parse(p).getroot()
    assert len(root.findall(f".//{SVG}polyline")) == 2
    assert len(root.findall(f".//{SVG}circle")) == 5
