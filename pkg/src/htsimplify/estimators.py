"""scikit-learn compatible wrappers.

Simplifiers take a single polyline as an ``(n_vertices, 2)`` array: ``fit``
decides which vertices survive, ``transform`` returns them. Because the
learned state is a vertex selection, ``transform`` only accepts the line
that was fitted (same vertex count after normalization).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .geometry import Polyline
from .scaling import DEFAULT_HEAD_LIMIT, divider_dimension, head_tail_breaks
from .simplify import (
    MeasureKind,
    measure_tree,
    repair_crossings,
    simplify_dp,
    simplify_ht,
    simplify_vw,
    simplify_vw_count,
)


def _check_line(X) -> Polyline:
    X = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if X.shape[1] != 2:
        raise ValueError(f"expected an (n_vertices, 2) array, got {X.shape[1]} columns")
    return Polyline(X)


def _check_values(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single column of values, got {X.shape[1]}")
    return X[:, 0]


class HeadTailBreaks(TransformerMixin, BaseEstimator):
    """Head/tail breaks classifier for a 1-D heavy-tailed sample.

    After ``fit``, ``means_`` holds the split thresholds and ``ht_index_``
    the number of levels; ``transform``/``predict`` map values to levels.
    """

    def __init__(self, head_limit: float = DEFAULT_HEAD_LIMIT):
        self.head_limit = head_limit

    def fit(self, X, y=None):
        values = _check_values(X)
        result = head_tail_breaks(values, self.head_limit)
        self.means_ = np.array(result.means)
        self.head_counts_ = np.array(result.head_counts, dtype=int)
        self.head_fractions_ = np.array(result.head_fractions)
        self.ht_index_ = result.ht_index
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "means_")
        values = _check_values(X)
        return 1 + (values[:, None] > self.means_[None, :]).sum(axis=1)

    def transform(self, X):
        return self.predict(X).reshape(-1, 1)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)


class _LineSimplifier(TransformerMixin, BaseEstimator):
    def _simplify(self, line: Polyline):
        raise NotImplementedError

    def fit(self, X, y=None):
        line = _check_line(X)
        result = self._simplify(line)
        if getattr(self, "repair_crossings", False):
            result = repair_crossings(line, result)
        self.line_ = line
        self.result_ = result
        self.retained_ = np.array(result.retained, dtype=int)
        self.n_vertices_in_ = len(line)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        line = _check_line(X)
        if len(line) != self.n_vertices_in_:
            raise ValueError(
                f"fitted on a line with {self.n_vertices_in_} vertices, got {len(line)}; refit on the new line"
            )
        return line.coords[self.retained_].copy()


class HeadTailSimplifier(_LineSimplifier):
    """Keep vertices whose head/tail level of ``measure`` is at least ``keep_level``."""

    def __init__(self, measure="x", keep_level=2, head_limit=DEFAULT_HEAD_LIMIT, repair_crossings=False):
        self.measure = measure
        self.keep_level = keep_level
        self.head_limit = head_limit
        self.repair_crossings = repair_crossings

    def _simplify(self, line):
        kind = MeasureKind.parse(self.measure)
        self.tree_ = measure_tree(line, kind)
        result = simplify_ht(line, kind, self.keep_level, self.head_limit, tree=self.tree_)
        self.ht_index_ = result.ht_index
        self.levels_ = np.asarray(result.levels)
        return result


class DouglasPeuckerSimplifier(_LineSimplifier):
    def __init__(self, tolerance=1.0, repair_crossings=False):
        self.tolerance = tolerance
        self.repair_crossings = repair_crossings

    def _simplify(self, line):
        return simplify_dp(line, self.tolerance)


class VisvalingamWhyattSimplifier(_LineSimplifier):
    """Effective-area elimination down to ``min_area`` or to ``target_count`` vertices."""

    def __init__(self, min_area=None, target_count=None, repair_crossings=False):
        self.min_area = min_area
        self.target_count = target_count
        self.repair_crossings = repair_crossings

    def _simplify(self, line):
        if (self.min_area is None) == (self.target_count is None):
            raise ValueError("set exactly one of min_area or target_count")
        if self.min_area is not None:
            result = simplify_vw(line, self.min_area)
        else:
            result = simplify_vw_count(line, self.target_count)
        self.elimination_order_ = np.array(result.eliminated, dtype=int)
        return result


class DividerDimension(BaseEstimator):
    """Fractal dimension of a polyline from divider walks at several ruler lengths.

    Default rulers are ``extent / 3**k`` for ``k = 1..n_rulers``.
    """

    def __init__(self, rulers=None, n_rulers=5, fractional=True):
        self.rulers = rulers
        self.n_rulers = n_rulers
        self.fractional = fractional

    def fit(self, X, y=None):
        line = _check_line(X)
        rulers = self.rulers
        if rulers is None:
            extent = float(np.hypot(*(line.coords[-1] - line.coords[0])))
            rulers = [extent / 3.0 ** k for k in range(1, self.n_rulers + 1)]
        res = divider_dimension(line, rulers, fractional=self.fractional)
        self.samples_ = res.samples
        self.dimension_ = res.fitted_dimension
        self.r2_ = res.fit_r2
        self.length_slope_ = res.length_slope
        self.n_features_in_ = 2
        return self
