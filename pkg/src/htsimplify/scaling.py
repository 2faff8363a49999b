"""Heavy-tail statistics: head/tail breaks, rank-size series and divider-walk
fractal dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import (
    EmptyInput,
    InsufficientSamples,
    NegativeValue,
    RulerNotPositive,
    RulerTooLarge,
)
from .geometry import as_polyline, get_tolerance

DEFAULT_HEAD_LIMIT = 0.4


@dataclass(frozen=True)
class HeadTailClassification:
    """Result of recursive mean splitting.

    ``means[i]`` is the threshold of split ``i``; ``head_counts[i]`` and
    ``head_fractions[i]`` describe the part strictly above it. ``levels``
    follows input order, 1 being the lowest (the first tail).
    """

    means: tuple[float, ...]
    head_counts: tuple[int, ...]
    head_fractions: tuple[float, ...]
    levels: np.ndarray
    head_limit: float

    @property
    def ht_index(self) -> int:
        return len(self.means) + 1

    def level_of(self, value: float) -> int:
        return 1 + sum(1 for m in self.means if value > m)


def _as_values(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("head/tail breaks needs at least one value")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if np.any(v < 0):
        raise NegativeValue("head/tail breaks expects non-negative values")
    return v


def head_tail_breaks(values, head_limit: float = DEFAULT_HEAD_LIMIT) -> HeadTailClassification:
    """Split ``values`` at the mean, recursing into the head.

    A split is accepted while the head (values strictly above the mean)
    holds at most ``head_limit`` of the current part. Recursion continues
    into an accepted head only if it has at least two distinct values.
    """
    if not 0 < head_limit < 1:
        raise ValueError(f"head_limit must lie in (0, 1), got {head_limit!r}")
    v = _as_values(values)

    means: list[float] = []
    counts: list[int] = []
    fractions: list[float] = []
    current = v
    while len(current) >= 2 and current.min() != current.max():
        mean = math.fsum(current.tolist()) / len(current)
        head = current[current > mean]
        frac = len(head) / len(current)
        if frac > head_limit:
            break
        means.append(mean)
        counts.append(len(head))
        fractions.append(frac)
        current = head

    levels = np.ones(len(v), dtype=np.int64)
    for m in means:
        levels += v > m
    return HeadTailClassification(tuple(means), tuple(counts), tuple(fractions), levels, head_limit)


def ht_index(values, head_limit: float = DEFAULT_HEAD_LIMIT) -> int:
    return head_tail_breaks(values, head_limit).ht_index


@dataclass(frozen=True)
class RankSize:
    ranks: np.ndarray
    sizes: np.ndarray
    order: np.ndarray  # input index of each ranked item

    def __len__(self):
        return len(self.ranks)

    @property
    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.ranks.tolist(), self.sizes.tolist()))


def rank_size(values) -> RankSize:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("rank_size needs at least one value")
    order = np.argsort(-v, kind="stable")
    return RankSize(np.arange(1, len(v) + 1), v[order], order)


class DividerSample(NamedTuple):
    ruler: float
    steps: int
    length: float  # steps * ruler + trailing remainder

    @property
    def count(self) -> float:
        """Step count with the trailing partial chord counted fractionally."""
        return self.length / self.ruler


class DimensionFit(NamedTuple):
    dimension: float
    r2: float
    length_slope: float


@dataclass(frozen=True)
class DividerResult:
    samples: tuple[DividerSample, ...]
    fitted_dimension: float
    fit_r2: float
    length_slope: float


def _circle_exit(px, py, r, ax, ay, bx, by, t_min):
    """Smallest parameter t >= t_min on segment a-b at distance r from p."""
    dx, dy = bx - ax, by - ay
    fx, fy = ax - px, ay - py
    a = dx * dx + dy * dy
    if a == 0.0:
        return None
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - r * r
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    for t in sorted(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a))):
        if t_min <= t <= 1.0:
            return t
    return None


def _walk(coords: list, r: float) -> tuple[int, float]:
    n = len(coords)
    eps = get_tolerance()
    px, py = coords[0]
    seg, t = 0, 0.0
    steps = 0
    while True:
        found = None
        s = seg
        while s < n - 1:
            (ax, ay), (bx, by) = coords[s], coords[s + 1]
            # vertices touching the circle within tolerance count as hits;
            # the curve may only graze the circle there (Koch spike apexes)
            if s > seg and math.hypot(ax - px, ay - py) >= r - eps:
                found = (s, 0.0)
                break
            lo = t + 1e-12 if s == seg else 0.0
            hit = _circle_exit(px, py, r, ax, ay, bx, by, lo)
            if hit is not None:
                found = (s, hit)
                break
            s += 1
        if found is None:
            break
        seg, t = found
        (ax, ay), (bx, by) = coords[seg], coords[seg + 1]
        px, py = ax + t * (bx - ax), ay + t * (by - ay)
        steps += 1
    ex, ey = coords[-1]
    remainder = math.hypot(ex - px, ey - py)
    if remainder >= r - eps:
        steps += 1
        remainder = 0.0
    return steps, remainder


def divider_walk(line, rulers: Sequence[float], fractional: bool = True) -> list[DividerSample]:
    """Walk ``line`` with chords of each ruler length.

    Chord ends lie on the line and always advance along it. ``length`` is
    ``steps * ruler`` plus the trailing remainder when ``fractional`` is
    set, otherwise ``steps * ruler``.
    """
    line = as_polyline(line)
    rulers = [float(r) for r in rulers]
    if not rulers:
        raise InsufficientSamples("no rulers given")
    for r in rulers:
        if not r > 0:
            raise RulerNotPositive(f"ruler must be positive, got {r!r}")
    if any(b >= a for a, b in zip(rulers, rulers[1:])):
        raise ValueError("rulers must be strictly decreasing")
    coords = line.coords.tolist()
    extent = math.dist(coords[0], coords[-1])
    out = []
    for r in rulers:
        if r >= extent:
            raise RulerTooLarge(f"ruler {r} is not smaller than the end-to-end extent {extent}")
        steps, remainder = _walk(coords, r)
        length = steps * r + (remainder if fractional else 0.0)
        out.append(DividerSample(r, steps, length))
    return out


def _sample_xy(s):
    if isinstance(s, DividerSample):
        return s.ruler, s.count, s.length
    if len(s) == 2:
        r, n = s
        return float(r), float(n), float(n) * float(r)
    r, n, length = s
    return float(r), float(length) / float(r), float(length)


def fit_dimension(samples) -> DimensionFit:
    """Least-squares slope of log(count) against log(ruler).

    Accepts :class:`DividerSample` objects or plain ``(ruler, count)``
    pairs. ``dimension`` is minus the slope, ``r2`` the coefficient of
    determination of that fit and ``length_slope`` the slope of
    log(length) against log(ruler), which equals ``1 - dimension``.
    """
    pts = [_sample_xy(s) for s in samples]
    if len(pts) < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {len(pts)}")
    lr = np.log([p[0] for p in pts])
    ln = np.log([p[1] for p in pts])
    ll = np.log([p[2] for p in pts])
    if np.ptp(lr) == 0:
        raise InsufficientSamples("all samples share the same ruler")
    slope, intercept = np.polyfit(lr, ln, 1)
    resid = ln - (slope * lr + intercept)
    ss_tot = float(np.sum((ln - ln.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    lslope = float(np.polyfit(lr, ll, 1)[0])
    return DimensionFit(float(-slope), min(r2, 1.0), lslope)


def divider_dimension(line, rulers: Sequence[float], fractional: bool = True) -> DividerResult:
    samples = divider_walk(line, rulers, fractional=fractional)
    fit = fit_dimension(samples)
    return DividerResult(tuple(samples), fit.dimension, fit.r2, fit.length_slope)
