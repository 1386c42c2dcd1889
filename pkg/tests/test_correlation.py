import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import _oracles
from mca.correlation import SMALLEST_P, fractional_ranks, pearson, significance, spearman


def test_perfect_linear():
    res = pearson([1, 2, 3], [2, 4, 6])
    assert res.r == 1.0
    assert res.defined
    assert res.n == 3


def test_perfect_antilinear():
    assert pearson([1, 2, 3], [3, 2, 1]).r == -1.0


def test_known_r_four_points():
    res = pearson([1, 2, 3, 4], [1, 3, 2, 4])
    assert abs(res.r - 0.8) < 1e-12
    # t = 0.8 * sqrt(2 / 0.36) with 2 df has an exact two-sided tail of 0.2
    assert abs(res.p_value - 0.2) < 1e-12


def test_spearman_strictly_monotone_map():
    assert spearman([1, 2, 3], [1, 4, 9]).r == 1.0
    assert spearman([1, 2, 3], [9, 4, 1]).r == -1.0


def test_spearman_ties_average_ranks():
    assert fractional_ranks([1, 2, 2, 4]) == [1.0, 2.5, 2.5, 4.0]
    res = spearman([1, 2, 2, 4], [1, 3, 2, 4])
    expected = _oracles.spearman_naive([1, 2, 2, 4], [1, 3, 2, 4])
    assert abs(res.r - expected) < 1e-12
    assert abs(res.r - 4.5 / math.sqrt(4.5 * 5.0)) < 1e-12


def test_significance_zero_r_is_one():
    for n in (3, 10, 1000):
        assert significance(0.0, n) == 1.0


def test_significance_against_numeric_cdf():
    for r, n in [(0.8, 4), (0.3, 25), (-0.6, 12), (0.05, 500)]:
        assert abs(significance(r, n) - _oracles.t_two_sided_p(r, n)) < 1e-9


def test_significance_strong_correlation_tiny_p():
    assert significance(0.99, 50) < 1e-10


def test_significance_extremes_and_floor():
    assert significance(1.0, 5) == SMALLEST_P
    assert significance(-1.0, 5) == SMALLEST_P
    assert 0.0 < significance(0.999999, 1000) <= 1.0


def test_significance_errors():
    with pytest.raises(ValueError):
        significance(0.5, 2)
    with pytest.raises(ValueError):
        significance(1.5, 10)
    with pytest.raises(ValueError):
        significance(float("nan"), 10)


def test_input_validation():
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1], [2])
    with pytest.raises(ValueError):
        pearson([1, float("inf")], [1, 2])
    with pytest.raises(ValueError):
        spearman([1, float("nan"), 2], [1, 2, 3])


def test_zero_variance_not_defined():
    res = pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    assert not res.defined
    assert math.isnan(res.r)
    assert res.p_value == 1.0
    assert not spearman([2, 2, 2], [1, 5, 9]).defined


def test_two_points_have_unit_p():
    res = pearson([0.0, 1.0], [0.0, 2.0])
    assert res.r == 1.0
    assert res.p_value == 1.0


# Exactly representable values: eighths of bounded integers survive affine
# maps without rounding, which keeps the exactness properties testable.
_eighths = st.integers(min_value=-8000, max_value=8000).map(lambda k: k / 8.0)


def _paired(min_size=2, max_size=25):
    return st.integers(min_size, max_size).flatmap(
        lambda n: st.tuples(
            st.lists(_eighths, min_size=n, max_size=n),
            st.lists(_eighths, min_size=n, max_size=n),
        )
    )


@given(_paired())
def test_symmetry_exact(xy):
    x, y = xy
    assert pearson(x, y).r is not None
    a = pearson(x, y)
    b = pearson(y, x)
    assert (a.r == b.r) or (math.isnan(a.r) and math.isnan(b.r))
    sa, sb = spearman(x, y), spearman(y, x)
    assert (sa.r == sb.r) or (math.isnan(sa.r) and math.isnan(sb.r))


@given(
    _paired(),
    st.integers(1, 512).map(lambda k: k / 8.0),
    st.integers(-512, 512).map(lambda k: k / 8.0),
    st.booleans(),
)
def test_affine_equivariance(xy, a, b, negate):
    x, y = xy
    if negate:
        a = -a
    base = pearson(x, y)
    scaled = pearson([a * v + b for v in x], y)
    if not base.defined:
        assert not scaled.defined
        return
    sign = 1.0 if a > 0 else -1.0
    assert abs(scaled.r - sign * base.r) < 1e-12


@given(_paired())
def test_spearman_monotone_invariance_exact(xy):
    x, y = xy
    base = spearman(x, y)
    cubed = spearman([v**3 for v in x], y)
    assert (base.r == cubed.r) or (math.isnan(base.r) and math.isnan(cubed.r))
    assert base.p_value == cubed.p_value


@given(
    st.integers(4, 200),
    st.floats(0.01, 0.97),
    st.floats(0.005, 0.02),
)
def test_significance_monotone(n, r, dr):
    # decreasing in |r| at fixed n
    assert significance(r + dr, n) < significance(r, n)
    # decreasing in n at fixed r
    assert significance(r, n + 5) < significance(r, n)


@given(_paired(min_size=3))
def test_p_value_range(xy):
    x, y = xy
    res = pearson(x, y)
    assert 0.0 < res.p_value <= 1.0
    if res.defined:
        assert -1.0 <= res.r <= 1.0


@given(_paired(min_size=3, max_size=40))
def test_oracle_equivalence_sampled(xy):
    x, y = xy
    res = pearson(x, y)
    if not res.defined:
        return
    assert abs(res.r - _oracles.pearson_naive(x, y)) < 1e-12
