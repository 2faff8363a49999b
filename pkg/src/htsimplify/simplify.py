"""Line simplification: head/tail-breaks selection, Douglas-Peucker and
Visvalingam-Whyatt, plus crossing detection/repair and scaling assessment.

Every algorithm returns a :class:`SimplificationResult` holding indices into
the (normalized) input polyline; ``result.apply(line)`` materializes it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import (
    CollinearOverlap,
    NonPositiveThreshold,
    NonPositiveTolerance,
    RatioUndefined,
    TargetOutOfRange,
    TooFewVertices,
)
from .geometry import Point, Polyline, as_polyline, get_tolerance, segments_intersect, triangle_area
from .scaling import DEFAULT_HEAD_LIMIT, HeadTailClassification, RankSize, head_tail_breaks, rank_size


class MeasureKind(str, Enum):
    PERP_DISTANCE = "x"
    RATIO = "ratio"
    TRIANGLE_AREA = "area"
    TURN_ANGLE = "angle"

    @property
    def recursive(self) -> bool:
        return self is not MeasureKind.TURN_ANGLE

    @classmethod
    def parse(cls, name) -> "MeasureKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {
            "x": cls.PERP_DISTANCE, "distance": cls.PERP_DISTANCE, "perp_distance": cls.PERP_DISTANCE,
            "ratio": cls.RATIO, "x/d": cls.RATIO,
            "area": cls.TRIANGLE_AREA, "triangle_area": cls.TRIANGLE_AREA, "d*x/2": cls.TRIANGLE_AREA,
            "angle": cls.TURN_ANGLE, "turn_angle": cls.TURN_ANGLE, "alpha": cls.TURN_ANGLE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown measure {name!r}; choose from x, ratio, area, angle") from None


@dataclass(frozen=True)
class Split:
    start: int
    end: int
    vertex: int


@dataclass(frozen=True)
class MeasureTree:
    """Per-vertex measure values from recursive farthest-point splitting.

    Arrays are indexed by vertex; the two endpoints hold NaN (``parent``
    holds -1 for them and for vertices split directly off the full line).
    ``x`` and ``chord`` are the perpendicular distance and chord length at
    split time; ``x_path_min`` is the smallest ``x`` along the chain of
    splits leading to each vertex.
    """

    kind: MeasureKind
    values: np.ndarray
    x: np.ndarray
    chord: np.ndarray
    parent: np.ndarray
    depth: np.ndarray
    x_path_min: np.ndarray
    splits: tuple[Split, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.values)

    def interior_values(self) -> np.ndarray:
        return self.values[1:-1]


def _split_spans(coords: np.ndarray, eps: float):
    n = len(coords)
    x = np.full(n, np.nan)
    chord = np.full(n, np.nan)
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    path_min = np.full(n, np.nan)
    splits: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    lo = np.array([0], dtype=np.int64)
    hi = np.array([n - 1], dtype=np.int64)
    par = np.array([-1], dtype=np.int64)
    cap = np.array([np.inf])
    level = 0
    px_all, py_all = coords[:, 0], coords[:, 1]
    while len(lo):
        counts = hi - lo - 1
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        total = int(counts.sum())
        span_of = np.repeat(np.arange(len(lo)), counts)
        idx = lo[span_of] + 1 + (np.arange(total) - starts[span_of])

        ax, ay = px_all[lo], py_all[lo]
        dx, dy = px_all[hi] - ax, py_all[hi] - ay
        dlen = np.hypot(dx, dy)
        sax, say = ax[span_of], ay[span_of]
        sdx, sdy = dx[span_of], dy[span_of]
        px, py = px_all[idx], py_all[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.abs(sdx * (py - say) - sdy * (px - sax)) / dlen[span_of]
        degenerate = dlen < eps
        if degenerate.any():
            dmask = degenerate[span_of]
            dist[dmask] = np.hypot(px[dmask] - sax[dmask], py[dmask] - say[dmask])

        best = np.maximum.reduceat(dist, starts)
        is_best = dist == best[span_of]
        k = np.minimum.reduceat(np.where(is_best, idx, np.iinfo(np.int64).max), starts)

        x[k] = best
        chord[k] = dlen
        parent[k] = par
        depth[k] = level
        pm = np.minimum(best, cap)
        path_min[k] = pm
        splits.append((lo, hi, k))

        nlo = np.concatenate((lo, k))
        nhi = np.concatenate((k, hi))
        npar = np.concatenate((k, k))
        ncap = np.concatenate((pm, pm))
        keep = nhi - nlo >= 2
        lo, hi, par, cap = nlo[keep], nhi[keep], npar[keep], ncap[keep]
        level += 1

    flat = []
    for a, b, c in splits:
        flat.extend(Split(int(i), int(j), int(v)) for i, j, v in zip(a.tolist(), b.tolist(), c.tolist()))
    flat.sort(key=lambda s: (s.start, -s.end))
    return x, chord, parent, depth, path_min, tuple(flat)


def _turn_angles(coords: np.ndarray) -> np.ndarray:
    u = coords[1:-1] - coords[:-2]
    v = coords[2:] - coords[1:-1]
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = u[:, 0] * v[:, 0] + u[:, 1] * v[:, 1]
    return np.degrees(np.abs(np.arctan2(cross, dot)))


def measure_tree(line, kind=MeasureKind.PERP_DISTANCE, clamp: bool = False) -> MeasureTree:
    """Assign a measure value to every interior vertex.

    Recursive kinds split each span at the vertex farthest from its chord
    (lowest index on ties) and evaluate the measure there: ``x``, ``x/d``
    or ``d*x/2`` with ``d`` the chord length. ``clamp=True`` caps each
    value at its parent's, giving a monotone hierarchy. ``TURN_ANGLE`` is
    local: the deviation angle at each vertex.
    """
    line = as_polyline(line)
    kind = MeasureKind.parse(kind)
    n = len(line)
    if n < 3:
        raise TooFewVertices(f"measure_tree needs at least 3 vertices, got {n}")
    coords = line.coords
    eps = get_tolerance()
    x, chord, parent, depth, path_min, splits = _split_spans(coords, eps)

    if kind is MeasureKind.PERP_DISTANCE:
        values = x.copy()
    elif kind is MeasureKind.RATIO:
        interior = chord[1:-1]
        if np.any(interior < eps):
            bad = int(np.flatnonzero(interior < eps)[0]) + 1
            raise RatioUndefined(f"degenerate chord at vertex {bad}; x/d is undefined")
        values = x / chord
    elif kind is MeasureKind.TRIANGLE_AREA:
        values = chord * x / 2.0
    else:
        values = np.full(n, np.nan)
        values[1:-1] = _turn_angles(coords)

    if clamp and kind.recursive:
        # parents are always split before children, so ascending depth order works
        order = np.argsort(depth[1:-1], kind="stable") + 1
        for v in order.tolist():
            p = parent[v]
            if p >= 0 and values[v] > values[p]:
                values[v] = values[p]

    for arr in (values, x, chord, parent, depth, path_min):
        arr.setflags(write=False)
    return MeasureTree(kind, values, x, chord, parent, depth, path_min, splits)


@dataclass(frozen=True)
class SimplificationResult:
    """Retained vertex indices and per-vertex bookkeeping.

    ``scores`` ranks vertices by importance (measure value, or effective
    area at elimination for Visvalingam-Whyatt) and drives crossing repair.
    """

    retained: tuple[int, ...]
    levels: np.ndarray
    algorithm: str
    params: dict = field(default_factory=dict)
    scores: Optional[np.ndarray] = None
    eliminated: tuple[int, ...] = ()
    ht_index: Optional[int] = None
    residual_crossings: bool = False
    inserted: tuple[int, ...] = ()

    @property
    def n_retained(self) -> int:
        return len(self.retained)

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[list(self.retained)] = True
        return m

    def apply(self, line) -> Polyline:
        line = as_polyline(line)
        return Polyline._trusted(line.coords[list(self.retained)])


def _finish(n, keep_mask, levels, algorithm, params, scores, **extra) -> SimplificationResult:
    keep_mask[0] = keep_mask[-1] = True
    levels = np.asarray(levels)
    levels.setflags(write=False)
    if scores is not None:
        scores = np.asarray(scores, dtype=float)
        scores.setflags(write=False)
    retained = tuple(np.flatnonzero(keep_mask).tolist())
    return SimplificationResult(retained, levels, algorithm, params, scores, **extra)


def simplify_ht(
    line,
    kind=MeasureKind.PERP_DISTANCE,
    keep_level: int = 2,
    head_limit: float = DEFAULT_HEAD_LIMIT,
    *,
    tree: Optional[MeasureTree] = None,
    clamp: bool = False,
) -> SimplificationResult:
    """Keep the endpoints plus every vertex whose head/tail level is at least ``keep_level``.

    Level 1 is the whole set, so ``keep_level=1`` is the identity and each
    increment drops one more tail. Levels above the ht-index fall back to
    the top level; a line without any head (ht-index 1) keeps only its
    endpoints for ``keep_level >= 2``.
    """
    line = as_polyline(line)
    kind = MeasureKind.parse(kind)
    if int(keep_level) != keep_level or keep_level < 1:
        raise ValueError(f"keep_level must be an integer >= 1, got {keep_level!r}")
    if tree is None:
        tree = measure_tree(line, kind, clamp=clamp)
    elif tree.n_vertices != len(line) or tree.kind is not kind:
        raise ValueError("precomputed tree does not match the line or measure")
    ht = head_tail_breaks(tree.interior_values(), head_limit)
    n = len(line)
    levels = np.empty(n, dtype=np.int64)
    levels[1:-1] = ht.levels
    levels[0] = levels[-1] = ht.ht_index
    if ht.ht_index == 1 and keep_level > 1:
        # no head exists, so nothing counts as a characteristic vertex
        keep = np.zeros(n, dtype=bool)
    else:
        keep = levels >= min(int(keep_level), ht.ht_index)
    params = {"measure": kind.value, "keep_level": int(keep_level), "head_limit": head_limit}
    return _finish(n, keep, levels, "ht", params, tree.values, ht_index=ht.ht_index)


def simplify_dp(line, tolerance: float, *, tree: Optional[MeasureTree] = None) -> SimplificationResult:
    """Douglas-Peucker: split at the farthest vertex while it lies at least ``tolerance`` from the chord.

    Equivalently, a vertex survives when every split on its path from the
    full line (itself included) has ``x >= tolerance``.
    """
    line = as_polyline(line)
    if not tolerance > 0:
        raise NonPositiveTolerance(f"tolerance must be positive, got {tolerance!r}")
    n = len(line)
    params = {"tolerance": float(tolerance)}
    if n < 3:
        return _finish(n, np.zeros(n, dtype=bool), np.zeros(n, dtype=np.int64), "dp", params, None)
    if tree is None:
        tree = measure_tree(line, MeasureKind.PERP_DISTANCE)
    keep = np.zeros(n, dtype=bool)
    keep[1:-1] = tree.x_path_min[1:-1] >= tolerance
    scores = tree.x.copy()
    return _finish(n, keep, np.zeros(n, dtype=np.int64), "dp", params, scores)


def _vw(coords: list, stop) -> tuple[list[int], list[float], list[float]]:
    n = len(coords)
    prev = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    area = [math.inf] * n
    heap = []
    for i in range(1, n - 1):
        area[i] = triangle_area(coords[i - 1], coords[i], coords[i + 1])
        heap.append((area[i], i))
    heapq.heapify(heap)
    alive = [True] * n
    remaining = n
    order: list[int] = []
    at: list[float] = []
    while heap:
        a, i = heap[0]
        if not alive[i] or a != area[i]:
            heapq.heappop(heap)
            continue
        if stop(a, remaining):
            break
        heapq.heappop(heap)
        alive[i] = False
        remaining -= 1
        order.append(i)
        at.append(a)
        p, q = prev[i], nxt[i]
        nxt[p] = q
        prev[q] = p
        for j in (p, q):
            if 0 < j < n - 1:
                area[j] = triangle_area(coords[prev[j]], coords[j], coords[nxt[j]])
                heapq.heappush(heap, (area[j], j))
    return order, at, area


def _vw_result(line: Polyline, order, at, area, params) -> SimplificationResult:
    n = len(line)
    keep = np.ones(n, dtype=bool)
    scores = np.array(area, dtype=float)
    for i, a in zip(order, at):
        keep[i] = False
        scores[i] = a
    return _finish(n, keep, np.zeros(n, dtype=np.int64), "vw", params, scores, eliminated=tuple(order))


def simplify_vw(line, min_area: float) -> SimplificationResult:
    """Visvalingam-Whyatt: drop the vertex with the smallest effective area
    (lowest index on ties) until every remaining area is at least ``min_area``."""
    line = as_polyline(line)
    if not min_area > 0:
        raise NonPositiveThreshold(f"min_area must be positive, got {min_area!r}")
    order, at, area = _vw(line.coords.tolist(), lambda a, remaining: a >= min_area)
    return _vw_result(line, order, at, area, {"min_area": float(min_area)})


def simplify_vw_count(line, target_count: int) -> SimplificationResult:
    line = as_polyline(line)
    n = len(line)
    if int(target_count) != target_count or not 2 <= target_count <= n:
        raise TargetOutOfRange(f"target_count must lie in [2, {n}], got {target_count!r}")
    order, at, area = _vw(line.coords.tolist(), lambda a, remaining: remaining <= target_count)
    return _vw_result(line, order, at, area, {"target_count": int(target_count)})


def _candidate_pairs(c: np.ndarray, chunk: int = 1 << 20):
    """Non-adjacent segment pairs whose bounding boxes overlap (a superset of crossings)."""
    eps = get_tolerance()
    x0, y0, x1, y1 = c[:-1, 0], c[:-1, 1], c[1:, 0], c[1:, 1]
    xmin, xmax = np.minimum(x0, x1) - eps, np.maximum(x0, x1) + eps
    ymin, ymax = np.minimum(y0, y1) - eps, np.maximum(y0, y1) + eps
    m = len(x0)
    order = np.argsort(xmin, kind="stable")
    sxmin = xmin[order]
    stop = np.searchsorted(sxmin, xmax[order], side="right")
    begin = np.arange(m) + 1
    counts = np.maximum(stop - begin, 0)
    out = []
    pos = 0
    while pos < m:
        # group rows so each batch expands to at most ~chunk pairs
        csum = np.cumsum(counts[pos:])
        end = pos + max(1, int(np.searchsorted(csum, chunk, side="right")))
        cnt = counts[pos:end]
        total = int(cnt.sum())
        if total:
            rows = np.repeat(np.arange(pos, end), cnt)
            offs = np.arange(total) - np.repeat(np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt)
            a = order[rows]
            b = order[begin[rows] + offs]
            ok = (np.abs(a - b) >= 2) & (ymin[a] <= ymax[b]) & (ymin[b] <= ymax[a])
            a, b = a[ok], b[ok]
            out.append(np.column_stack((np.minimum(a, b), np.maximum(a, b))))
        pos = end
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(out)


def detect_self_intersections(line) -> list[tuple[int, int, Point]]:
    """Proper crossings between non-adjacent segments, as ``(i, j, point)`` with ``i < j``.

    Segment ``i`` joins vertices ``i`` and ``i + 1``. Collinear overlaps
    are not point crossings and are left out.
    """
    line = as_polyline(line)
    c = line.coords
    if len(c) < 4:
        return []
    pairs = _candidate_pairs(c)
    pts = c.tolist()
    found = []
    for i, j in pairs.tolist():
        try:
            p = segments_intersect((pts[i], pts[i + 1]), (pts[j], pts[j + 1]))
        except CollinearOverlap:
            continue
        if p is not None:
            found.append((i, j, p))
    found.sort(key=lambda t: (t[0], t[1]))
    return found


def repair_crossings(original, result: SimplificationResult, kind=MeasureKind.PERP_DISTANCE) -> SimplificationResult:
    """Reinsert removed vertices until the simplified line stops crossing itself.

    For the first crossing that still has candidates, the removed original
    vertex with the highest score lying under either offending segment is
    put back. When no crossing has candidates left the result is returned
    with ``residual_crossings=True``.
    """
    original = as_polyline(original)
    n = len(original)
    scores = result.scores
    if scores is None or len(scores) != n:
        scores = measure_tree(original, kind).values if n >= 3 else np.zeros(n)
    scores = np.where(np.isnan(scores), -np.inf, scores)
    keep = result.mask(n)
    inserted: list[int] = []
    coords = original.coords
    while True:
        retained = np.flatnonzero(keep)
        crossings = detect_self_intersections(Polyline._trusted(coords[retained]))
        if not crossings:
            residual = False
            break
        pick = None
        for i, j, _ in crossings:
            cands = [v for s in (i, j) for v in range(retained[s] + 1, retained[s + 1])]
            if cands:
                pick = max(cands, key=lambda v: (scores[v], -v))
                break
        if pick is None:
            residual = True
            break
        keep[pick] = True
        inserted.append(int(pick))
    return replace(
        result,
        retained=tuple(np.flatnonzero(keep).tolist()),
        residual_crossings=residual,
        inserted=result.inserted + tuple(inserted),
        params={**result.params, "repaired": True},
    )


@dataclass(frozen=True)
class ScalingReport:
    ht_before: int
    ht_after: int
    means_before: tuple[float, ...]
    means_after: tuple[float, ...]
    head_fractions_before: tuple[float, ...]
    head_fractions_after: tuple[float, ...]
    rank_size_before: RankSize
    rank_size_after: RankSize

    @property
    def retains_scaling(self) -> bool:
        """Whether the simplified values still split into minority heads."""
        return self.ht_after >= 2 and all(f < 0.5 for f in self.head_fractions_after)


def _report(before: HeadTailClassification, after: HeadTailClassification, vb, va) -> ScalingReport:
    return ScalingReport(
        before.ht_index, after.ht_index, before.means, after.means,
        before.head_fractions, after.head_fractions, rank_size(vb), rank_size(va),
    )


def compare_scaling(values_before, values_after, head_limit: float = DEFAULT_HEAD_LIMIT) -> ScalingReport:
    """Side-by-side head/tail statistics of two value sets."""
    vb = np.asarray(values_before, dtype=float)
    va = np.asarray(values_after, dtype=float)
    return _report(head_tail_breaks(vb, head_limit), head_tail_breaks(va, head_limit), vb, va)


def assess_scaling_retention(original, simplified, kind=MeasureKind.PERP_DISTANCE,
                             head_limit: float = DEFAULT_HEAD_LIMIT) -> ScalingReport:
    kind = MeasureKind.parse(kind)
    vb = measure_tree(original, kind).interior_values()
    va = measure_tree(simplified, kind).interior_values()
    return compare_scaling(vb, va, head_limit)
