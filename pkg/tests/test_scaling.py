import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from htsimplify.exceptions import EmptyInput, InsufficientSamples, NegativeValue, RulerNotPositive, RulerTooLarge
from htsimplify.geometry import Polyline
from htsimplify.koch import koch_curve, triangle_inventory
from htsimplify.scaling import (
    divider_dimension,
    divider_walk,
    fit_dimension,
    head_tail_breaks,
    ht_index,
    rank_size,
)

LOG43 = math.log(4) / math.log(3)


def exact_breaks(values, head_limit=Fraction(2, 5)):
    """Fraction arithmetic oracle for the stop rule."""
    cur = [Fraction(v) for v in values]
    means = []
    while len(cur) >= 2 and len(set(cur)) > 1:
        m = sum(cur) / len(cur)
        head = [v for v in cur if v > m]
        if Fraction(len(head), len(cur)) > head_limit:
            break
        means.append(m)
        cur = head
    return means


def test_koch21_worked_example(koch21):
    res = head_tail_breaks(koch21)
    exact = exact_breaks([Fraction(1, 3)] + [Fraction(1, 9)] * 4 + [Fraction(1, 27)] * 16)
    assert exact == [Fraction(37, 567), Fraction(7, 45)]
    assert res.means == pytest.approx([37 / 567, 7 / 45], abs=1e-12)
    assert round(res.means[0], 2) == 0.07 and round(res.means[1], 2) == 0.16
    assert res.head_counts == (5, 1)
    assert res.head_fractions == pytest.approx([5 / 21, 0.2])
    assert res.ht_index == 3
    assert Counter(res.levels.tolist()) == {1: 16, 2: 4, 3: 1}


def test_no_variation():
    res = head_tail_breaks([5, 5, 5])
    assert res.means == () and res.ht_index == 1
    assert res.levels.tolist() == [1, 1, 1]


def test_balanced_split_rejected():
    res = head_tail_breaks(list(range(1, 11)), head_limit=0.4)
    assert res.means == () and res.ht_index == 1
    # a looser limit accepts the 50% head
    assert head_tail_breaks(list(range(1, 11)), head_limit=0.6).ht_index > 1


def test_ht_index_examples(koch21):
    assert ht_index(koch21) == 3
    assert ht_index([7]) == 1
    assert ht_index(triangle_inventory(4).values()) == 4
    assert [ht_index(triangle_inventory(n).values()) for n in range(1, 7)] == [1, 2, 3, 4, 5, 6]


def test_errors():
    with pytest.raises(EmptyInput):
        head_tail_breaks([])
    with pytest.raises(NegativeValue):
        head_tail_breaks([1, -1])
    with pytest.raises(ValueError):
        head_tail_breaks([1, 2], head_limit=1.0)
    with pytest.raises(EmptyInput):
        rank_size([])


values_st = st.lists(st.integers(0, 10_000), min_size=1, max_size=80)


@given(values_st)
def test_matches_exact_oracle(values):
    assert len(head_tail_breaks(values).means) == len(exact_breaks(values))


@given(values_st, st.sampled_from([0.2, 0.3, 0.4, 0.5]))
def test_invariants(values, limit):
    res = head_tail_breaks(values, limit)
    v = np.asarray(values, dtype=float)
    assert res.ht_index == len(res.means) + 1
    assert all(a < b for a, b in zip(res.means, res.means[1:]))
    assert all(0 < f <= limit for f in res.head_fractions)
    if limit < 0.5:
        assert all(f < 0.5 for f in res.head_fractions)
    # order-isomorphic levels
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(res.levels[order]) >= 0)
    # nested level sets
    for k, m in enumerate(res.means, start=1):
        assert set(np.flatnonzero(res.levels >= k + 1)) <= set(np.flatnonzero(v > m))


@given(values_st, st.integers(1, 1000))
def test_ht_index_scale_invariant(values, c):
    assert ht_index([c * x for x in values]) == ht_index(values)


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=80), st.sampled_from([2.0, 0.5, 0.25, 1024.0]))
def test_ht_index_scale_invariant_binary(values, c):
    assert ht_index([c * x for x in values]) == ht_index(values)


def test_half_head_accepted_only_at_limit_half():
    assert head_tail_breaks([0, 2], head_limit=0.5).head_fractions == (0.5,)
    assert head_tail_breaks([0, 2], head_limit=0.4).ht_index == 1


def test_rank_size_examples(koch21):
    rs = rank_size(koch21)
    assert rs.ranks.tolist() == list(range(1, 22))
    assert rs.sizes[0] == 1 / 3
    assert rs.sizes[1:5].tolist() == [1 / 9] * 4
    assert rs.sizes[5:].tolist() == [1 / 27] * 16
    assert rank_size([42]).pairs == [(1, 42.0)]
    assert rank_size([3, 1, 2]).pairs == [(1, 3.0), (2, 2.0), (3, 1.0)]


def test_rank_size_stable_ties():
    rs = rank_size([1, 5, 1, 5])
    assert rs.order.tolist() == [1, 3, 0, 2]


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=100))
def test_rank_size_round_trip(values):
    rs = rank_size(values)
    assert sorted(rs.sizes.tolist()) == sorted(float(v) for v in values)
    assert np.all(np.diff(rs.sizes) <= 0)
    assert rs.ranks.tolist() == list(range(1, len(values) + 1))


def test_divider_straight_line():
    s = divider_walk(Polyline([(0, 0), (1, 0)]), [0.5, 0.25])
    assert [x.steps for x in s] == [2, 4]
    assert [x.length for x in s] == pytest.approx([1.0, 1.0])
    base = divider_walk(koch_curve(0), [1 / 3])
    assert base[0].steps == 3 and base[0].length == pytest.approx(1.0)


def test_divider_remainder():
    s = divider_walk(Polyline([(0, 0), (1, 0)]), [0.3])[0]
    assert s.steps == 3
    assert s.length == pytest.approx(1.0)
    assert s.count == pytest.approx(1 / 0.3)
    floor = divider_walk(Polyline([(0, 0), (1, 0)]), [0.3], fractional=False)[0]
    assert floor.length == pytest.approx(0.9) and floor.count == pytest.approx(3)


def test_divider_chords_have_ruler_length():
    # right angle: from (0,0) a 0.8 chord reaches (0.8, 0); next lands on the vertical leg
    s = divider_walk(Polyline([(0, 0), (1, 0), (1, 1)]), [0.8])[0]
    assert s.steps == 2
    second = (1.0, math.sqrt(0.8 ** 2 - 0.2 ** 2))
    assert s.length == pytest.approx(1.6 + math.dist(second, (1, 1)))


def test_divider_koch6_counts():
    rulers = [3.0 ** -k for k in range(1, 6)]
    samples = divider_walk(koch_curve(6), rulers)
    for k, s in enumerate(samples, start=1):
        assert s.steps == pytest.approx(4 ** k, rel=0.05)
    assert all(a.steps <= b.steps for a, b in zip(samples, samples[1:]))


def test_divider_errors():
    line = koch_curve(2)
    with pytest.raises(RulerNotPositive):
        divider_walk(line, [0.1, 0])
    with pytest.raises(RulerTooLarge):
        divider_walk(line, [1.0])
    with pytest.raises(ValueError):
        divider_walk(line, [0.1, 0.2])


def test_fit_dimension_exact():
    fit = fit_dimension([(3.0 ** -k, 4 ** k) for k in range(1, 6)])
    assert fit.dimension == pytest.approx(LOG43, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.length_slope == pytest.approx(1 - LOG43, abs=1e-9)
    line = fit_dimension([(r, 1 / r) for r in (0.5, 0.25, 0.1)])
    assert line.dimension == pytest.approx(1.0)


@given(st.floats(1, 2), st.floats(0.1, 10), st.lists(st.floats(1e-4, 1.0), min_size=2, max_size=8, unique=True))
def test_fit_dimension_recovers_exponent(d0, c, rulers):
    rulers = sorted(set(rulers), reverse=True)
    if len(rulers) < 2 or rulers[0] / rulers[-1] < 1.01:
        return
    fit = fit_dimension([(r, c * r ** -d0) for r in rulers])
    assert fit.dimension == pytest.approx(d0, abs=1e-9)


def test_fit_dimension_errors():
    with pytest.raises(InsufficientSamples):
        fit_dimension([(0.5, 2)])


def test_divider_dimension_koch():
    res = divider_dimension(koch_curve(6), [3.0 ** -k for k in range(1, 6)])
    assert res.fitted_dimension == pytest.approx(1.26, abs=0.05)
    assert res.fitted_dimension == pytest.approx(LOG43, abs=0.05)
    assert 0.0 <= res.fit_r2 <= 1.0
