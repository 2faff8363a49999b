"""Koch curve construction and triangle bookkeeping.

Curves are built by segment rewriting: every segment ``a -> b`` becomes
``a, p1, apex, p2, b`` where ``p1``/``p2`` sit at ``ratio`` and
``1 - ratio`` along the segment and the apex rises to the left of it.
Existing vertices are never moved, so the vertices of iteration ``m`` are
bitwise identical to every ``4**(n-m)``-th vertex of iteration ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

import numpy as np

from .exceptions import IterationTooLarge, LevelOutOfRange
from .geometry import Polyline

DEFAULT_VERTEX_BUDGET = 2 ** 26

_SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class KochSpec:
    iterations: int = 0
    ratio: Real = Fraction(1, 3)
    height_factor: float = 1.0

    def __post_init__(self):
        if isinstance(self.iterations, bool) or int(self.iterations) != self.iterations or self.iterations < 0:
            raise ValueError(f"iterations must be a non-negative integer, got {self.iterations!r}")
        if not (0 < self.ratio <= 0.5):
            raise ValueError(f"ratio must lie in (0, 1/2], got {self.ratio!r}")
        if not (self.height_factor > 0 and math.isfinite(self.height_factor)):
            raise ValueError(f"height_factor must be positive, got {self.height_factor!r}")

    @property
    def vertex_count(self) -> int:
        return 4 ** self.iterations + 1


@dataclass(frozen=True)
class TriangleEntry:
    scale: Real
    count: int
    level: int


@dataclass(frozen=True)
class TriangleInventory:
    """Triangle sizes (side lengths) of a Koch curve, largest first."""

    entries: tuple[TriangleEntry, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def total(self) -> int:
        return sum(e.count for e in self.entries)

    def values(self) -> list[float]:
        """One float per triangle, largest scale first."""
        out: list[float] = []
        for e in self.entries:
            out.extend([float(e.scale)] * e.count)
        return out

    def as_pairs(self) -> list[tuple[Real, int]]:
        return [(e.scale, e.count) for e in self.entries]


def _spec(spec_or_n, ratio=None, height_factor=None) -> KochSpec:
    if isinstance(spec_or_n, KochSpec):
        return spec_or_n
    kw = {}
    if ratio is not None:
        kw["ratio"] = ratio
    if height_factor is not None:
        kw["height_factor"] = height_factor
    return KochSpec(int(spec_or_n), **kw)


def _check_budget(n: int, budget: int) -> None:
    if 4 ** n + 1 > budget:
        raise IterationTooLarge(f"{4 ** n + 1} vertices for {n} iterations exceeds the budget of {budget}")


def _rewrite(pts: np.ndarray, gen: np.ndarray, ratio: float, height: float, tag: int):
    a = pts[:-1]
    b = pts[1:]
    d = b - a
    normal = np.column_stack((-d[:, 1], d[:, 0]))
    p1 = a + ratio * d
    p2 = b - ratio * d
    apex = (a + b) / 2.0 + height * normal

    m = len(a)
    out = np.empty((4 * m + 1, 2))
    out[0:-1:4] = a
    out[1::4] = p1
    out[2::4] = apex
    out[3::4] = p2
    out[-1] = pts[-1]

    out_gen = np.empty(4 * m + 1, dtype=np.int64)
    out_gen[0:-1:4] = gen[:-1]
    out_gen[1::4] = tag
    out_gen[2::4] = tag
    out_gen[3::4] = tag
    out_gen[-1] = gen[-1]
    return out, out_gen


def koch_vertices(spec, *, budget: int = DEFAULT_VERTEX_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Raw vertex array plus the iteration that introduced each vertex (0 for the baseline ends)."""
    spec = _spec(spec)
    _check_budget(spec.iterations, budget)
    ratio = float(spec.ratio)
    height = float(spec.height_factor) * ratio * _SQRT3_2
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    gen = np.zeros(2, dtype=np.int64)
    for it in range(1, spec.iterations + 1):
        pts, gen = _rewrite(pts, gen, ratio, height, it)
    return pts, gen


def koch_curve(spec=0, *, ratio=None, height_factor=None, budget: int = DEFAULT_VERTEX_BUDGET) -> Polyline:
    """Koch curve from (0, 0) to (1, 0).

    ``spec`` is a :class:`KochSpec` or an iteration count. With the
    default parameters the curve has ``4**n + 1`` vertices and length
    ``(4/3)**n``.

    >>> len(koch_curve(3))
    65
    """
    spec = _spec(spec, ratio, height_factor)
    pts, _ = koch_vertices(spec, budget=budget)
    if spec.ratio == Fraction(1, 3) and spec.height_factor == 1:
        return Polyline._trusted(pts)
    return Polyline(pts)


def triangle_inventory(n: int, ratio: Real = Fraction(1, 3)) -> TriangleInventory:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return TriangleInventory(
        tuple(TriangleEntry(scale=ratio ** k, count=4 ** (k - 1), level=k) for k in range(1, n + 1))
    )


def koch_drop_levels(n: int, k: int, *, budget: int = DEFAULT_VERTEX_BUDGET) -> Polyline:
    """Remove the ``k`` smallest triangle scales from ``koch_curve(n)``.

    Each dropped triangle takes its three introduced vertices (both
    trisection points and the apex) with it, leaving exactly the vertices
    of ``koch_curve(n - k)``.
    """
    if not 0 <= k <= n:
        raise LevelOutOfRange(f"k must lie in [0, {n}], got {k}")
    pts, gen = koch_vertices(KochSpec(n), budget=budget)
    return Polyline._trusted(pts[gen <= n - k])
