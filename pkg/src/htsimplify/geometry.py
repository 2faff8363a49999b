"""Planar primitives shared by every other module.

All coincidence and degeneracy tests use a single library-wide tolerance
(``get_tolerance`` / ``set_tolerance``), 1e-9 map units by default.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import CollinearOverlap, DegenerateVertex, InvalidPolyline

_TOLERANCE = 1e-9


def get_tolerance() -> float:
    return _TOLERANCE


def set_tolerance(eps: float) -> None:
    global _TOLERANCE
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"tolerance must be positive and finite, got {eps!r}")
    _TOLERANCE = float(eps)


@contextmanager
def tolerance(eps: float):
    """Temporarily switch the geometric tolerance."""
    old = get_tolerance()
    set_tolerance(eps)
    try:
        yield
    finally:
        set_tolerance(old)


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


class Polyline:
    """Immutable ordered sequence of at least two 2D vertices.

    Consecutive vertices closer than the tolerance are collapsed on
    construction, so indices always refer to the normalized vertex list.
    """

    __slots__ = ("_coords",)

    def __init__(self, vertices: Iterable[Sequence[float]] | np.ndarray):
        arr = np.array(vertices if isinstance(vertices, np.ndarray) else list(vertices), dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidPolyline(f"expected an (n, 2) vertex array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidPolyline("vertex coordinates must be finite")
        arr = _drop_consecutive_duplicates(arr, get_tolerance())
        if len(arr) < 2:
            raise InvalidPolyline("a polyline needs at least 2 distinct vertices")
        arr.setflags(write=False)
        self._coords = arr

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "Polyline":
        # Skips validation; caller guarantees a normalized finite (n, 2) array.
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=float)
        arr.setflags(write=False)
        obj._coords = arr
        return obj

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    def __len__(self) -> int:
        return len(self._coords)

    def __getitem__(self, i: int) -> Point:
        x, y = self._coords[i]
        return Point(float(x), float(y))

    def __iter__(self) -> Iterator[Point]:
        for x, y in self._coords.tolist():
            yield Point(x, y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polyline):
            return NotImplemented
        return self._coords.shape == other._coords.shape and bool(np.all(self._coords == other._coords))

    def __hash__(self):
        return hash(self._coords.tobytes())

    def __repr__(self) -> str:
        return f"Polyline(n={len(self)}, start={tuple(self[0])}, end={tuple(self[-1])})"

    def subset(self, indices: Sequence[int]) -> "Polyline":
        return Polyline(self._coords[np.asarray(indices, dtype=int)])

    def segments(self) -> list[Segment]:
        pts = list(self)
        return [Segment(p, q) for p, q in zip(pts[:-1], pts[1:])]


def _drop_consecutive_duplicates(arr: np.ndarray, eps: float) -> np.ndarray:
    if len(arr) < 2:
        return arr
    steps = np.hypot(np.diff(arr[:, 0]), np.diff(arr[:, 1]))
    if np.all(steps >= eps):
        return arr.copy()
    keep = [0]
    last = arr[0]
    for i in range(1, len(arr)):
        if math.hypot(arr[i, 0] - last[0], arr[i, 1] - last[1]) >= eps:
            keep.append(i)
            last = arr[i]
    return arr[keep]


def as_polyline(line) -> Polyline:
    return line if isinstance(line, Polyline) else Polyline(line)


def distance(p, q) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def perpendicular_distance(p, chord_a, chord_b) -> float:
    """Distance from ``p`` to the infinite line through the chord.

    A chord shorter than the tolerance falls back to the Euclidean
    distance ``|p - chord_a|``.
    """
    dx = chord_b[0] - chord_a[0]
    dy = chord_b[1] - chord_a[1]
    d = math.hypot(dx, dy)
    if d < get_tolerance():
        return math.hypot(p[0] - chord_a[0], p[1] - chord_a[1])
    return abs(dx * (p[1] - chord_a[1]) - dy * (p[0] - chord_a[0])) / d


def triangle_area(a, b, c) -> float:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2.0


def turn_angle(a, b, c) -> float:
    """Deviation in degrees from straight continuation at ``b``.

    0 means ``a -> b -> c`` continues straight on, 180 a full reversal.
    """
    ux, uy = b[0] - a[0], b[1] - a[1]
    vx, vy = c[0] - b[0], c[1] - b[1]
    eps = get_tolerance()
    if math.hypot(ux, uy) < eps or math.hypot(vx, vy) < eps:
        raise DegenerateVertex(f"vertex {tuple(b)} coincides with a neighbour")
    return math.degrees(abs(math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)))


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def segments_intersect(s1, s2) -> Optional[Point]:
    """Proper crossing point of two closed segments, or ``None``.

    Endpoint touches (including T-junctions), disjoint and parallel pairs
    give ``None``; a collinear overlap of positive length raises
    :class:`CollinearOverlap`.
    """
    # Canonical argument and endpoint order keeps the result bitwise symmetric.
    k1 = tuple(sorted((tuple(s1[0]), tuple(s1[1]))))
    k2 = tuple(sorted((tuple(s2[0]), tuple(s2[1]))))
    if k2 < k1:
        k1, k2 = k2, k1
    (ax, ay), (bx, by) = k1
    (cx, cy), (dx, dy) = k2
    eps = get_tolerance()

    rx, ry = bx - ax, by - ay
    sx, sy = dx - cx, dy - cy
    rlen = math.hypot(rx, ry)
    slen = math.hypot(sx, sy)
    if rlen < eps or slen < eps:
        return None

    denom = rx * sy - ry * sx
    qx, qy = cx - ax, cy - ay
    if abs(denom) <= eps * rlen * slen:
        # parallel: overlapping only if c lies on the line through a-b
        if abs(qx * ry - qy * rx) / rlen > eps:
            return None
        t0 = (qx * rx + qy * ry) / rlen
        t1 = ((dx - ax) * rx + (dy - ay) * ry) / rlen
        lo, hi = min(t0, t1), max(t0, t1)
        overlap = min(hi, rlen) - max(lo, 0.0)
        if overlap > eps:
            raise CollinearOverlap(Segment(Point(ax, ay), Point(bx, by)), Segment(Point(cx, cy), Point(dx, dy)))
        return None

    t = (qx * sy - qy * sx) / denom
    u = (qx * ry - qy * rx) / denom
    tt = eps / rlen
    tu = eps / slen
    if tt < t < 1.0 - tt and tu < u < 1.0 - tu:
        return Point(ax + t * rx, ay + t * ry)
    return None


def polyline_length(line) -> float:
    c = as_polyline(line).coords
    return float(math.fsum(np.hypot(np.diff(c[:, 0]), np.diff(c[:, 1])).tolist()))
