"""Curve constructors, min-plus convolution, deviations and dominance."""

from fractions import Fraction
from math import lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curve_algebra import (
    INFINITY,
    Curve,
    InvalidParameterError,
    UnsupportedShapeError,
    dominates,
    evaluate,
    horizontal_deviation,
    impulse,
    min_plus_conv,
    rate_latency,
    token_bucket,
    vertical_deviation,
)
from strategies import (
    concave_curves,
    convex_curves,
    impulse_curves,
    rate_latency_curves,
    service_curves,
)

GRID = 30


def brute_conv(f: Curve, g: Curve, t: int):
    return min(f.value_at(s) + g.value_at(t - s) for s in range(t + 1))


class TestConstructors:
    def test_zero_token_bucket(self):
        zero = token_bucket(0, 0)
        assert evaluate(zero, 0) == 0
        assert evaluate(zero, 1000) == 0
        assert zero.rate_latency_params == (0, 0)

    def test_token_bucket_values(self):
        assert evaluate(token_bucket(10, 100), 5) == 150
        assert evaluate(token_bucket(4e5, 1e5), 0) == 100000

    @pytest.mark.parametrize('rate, burst', [(-1, 0), (0, -1)])
    def test_token_bucket_rejects_negative(self, rate, burst):
        with pytest.raises(InvalidParameterError):
            token_bucket(rate, burst)

    def test_rate_latency_values(self):
        curve = rate_latency(10 ** 6, Fraction(12, 1000))
        assert evaluate(curve, Fraction('0.012')) == 0
        assert evaluate(curve, Fraction('1.012')) == 10 ** 6
        assert evaluate(rate_latency(7, 0), 3) == 21

    @pytest.mark.parametrize('rate, latency', [(0, 1), (-2, 0), (1, -1)])
    def test_rate_latency_rejects_bad_parameters(self, rate, latency):
        with pytest.raises(InvalidParameterError):
            rate_latency(rate, latency)

    def test_impulse_is_inclusive_then_infinite(self):
        curve = impulse(0.11)
        assert evaluate(curve, Fraction(11, 100)) == 0
        assert evaluate(curve, Fraction(12, 100)) == INFINITY

    def test_impulse_rejects_negative_delay(self):
        with pytest.raises(InvalidParameterError):
            impulse(-1)

    def test_negative_time_is_rejected(self):
        with pytest.raises(InvalidParameterError):
            evaluate(token_bucket(1, 1), -1)

    def test_build_rejects_malformed_breakpoints(self):
        with pytest.raises(InvalidParameterError):
            Curve.build([(1, 0, 1)])
        with pytest.raises(InvalidParameterError):
            Curve.build([(0, 0, 1), (1, 5, 1)])
        with pytest.raises(InvalidParameterError):
            Curve.build([(0, 5, -1)])

    def test_build_merges_collinear_segments(self):
        curve = Curve.build([(0, 0, 2), (1, 2, 2), (3, 6, 1)])
        assert curve.breakpoints == ((0, 0, 2), (3, 6, 1))

    def test_record_round_trip_keeps_exact_values(self):
        curve = rate_latency(Fraction(2, 3), Fraction(7, 5))
        assert Curve.from_record(curve.to_record()) == curve
        assert curve.to_record()['breakpoints'][1] == ['7/5', '0', '2/3']


class TestConvolution:
    @given(st.one_of(concave_curves(), convex_curves(), rate_latency_curves))
    def test_impulse_zero_is_identity(self, f):
        assert min_plus_conv(f, impulse(0)) == f
        assert min_plus_conv(impulse(0), f) == f

    @given(st.integers(1, 50), st.integers(0, 20), st.integers(0, 20))
    def test_rate_latency_latencies_add(self, rate, t1, t2):
        result = min_plus_conv(rate_latency(rate, t1), rate_latency(rate, t2))
        assert result == rate_latency(rate, t1 + t2)

    def test_token_bucket_through_impulse_is_shifted(self):
        result = min_plus_conv(token_bucket(3, 10), impulse(4))
        assert evaluate(result, 2) == 10
        assert evaluate(result, 4) == 10
        assert evaluate(result, 9) == 10 + 3 * 5

    def test_unsupported_shapes_raise(self):
        convex = Curve.build([(0, 0, 1), (1, 1, 2)])
        concave = Curve.build([(0, 5, 2), (1, 7, 1)])
        with pytest.raises(UnsupportedShapeError):
            min_plus_conv(convex, concave)

    @settings(max_examples=70, deadline=None)
    @given(convex_curves(), st.one_of(convex_curves(), rate_latency_curves, impulse_curves))
    def test_convex_pairs_match_grid(self, f, g):
        result = min_plus_conv(f, g)
        for t in range(GRID):
            assert result.value_at(t) == brute_conv(f, g, t)

    @settings(max_examples=70, deadline=None)
    @given(concave_curves(), concave_curves())
    def test_concave_pairs_match_grid(self, f, g):
        result = min_plus_conv(f, g)
        for t in range(GRID):
            assert result.value_at(t) == brute_conv(f, g, t)

    @settings(max_examples=70, deadline=None)
    @given(concave_curves(), st.one_of(rate_latency_curves, impulse_curves))
    def test_concave_with_rate_latency_matches_grid(self, f, g):
        result = min_plus_conv(f, g)
        for t in range(GRID):
            assert result.value_at(t) == brute_conv(f, g, t)
        assert min_plus_conv(g, f) == result

    @settings(max_examples=150, deadline=None)
    @given(st.one_of(
        st.tuples(convex_curves(), st.one_of(convex_curves(), rate_latency_curves, impulse_curves)),
        st.tuples(concave_curves(), concave_curves()),
        st.tuples(concave_curves(), st.one_of(rate_latency_curves, impulse_curves)),
    ))
    def test_commutative(self, pair):
        f, g = pair
        forward, backward = min_plus_conv(f, g), min_plus_conv(g, f)
        for k in range(4 * GRID):
            t = Fraction(k, 4)
            assert forward.value_at(t) == backward.value_at(t)


def _horizon(alpha: Curve, beta: Curve) -> int:
    levels = max(v for _, v, _ in beta.breakpoints)
    ends = [alpha.times[-1], beta.times[-1], beta.infinite_after or 0]
    return int(max(ends) + levels) + 2


def _reach(beta: Curve, level: Fraction, strict: bool = False) -> Fraction:
    """inf of s with beta(s) >= level (beta(s) > level when strict)."""
    points = beta.breakpoints
    for i, (t, v, slope) in enumerate(points):
        if v > level or (v == level and not strict):
            return t
        end = points[i + 1][0] if i + 1 < len(points) else beta.infinite_after
        if slope > 0:
            crossing = t + (level - v) / slope
            if end is None or crossing < end:
                return crossing
    return beta.infinite_after


class TestDeviations:
    def test_token_bucket_against_rate_latency(self):
        alpha, beta = token_bucket(4, 10), rate_latency(5, 2)
        assert horizontal_deviation(alpha, beta).value == 2 + Fraction(10, 5)
        assert vertical_deviation(alpha, beta).value == 10 + 4 * 2

    def test_tail_overload_is_infinite(self):
        alpha, beta = token_bucket(6, 10), rate_latency(5, 2)
        assert horizontal_deviation(alpha, beta).is_infinite
        assert vertical_deviation(alpha, beta).is_infinite

    def test_impulse_service_curve(self):
        alpha = token_bucket(3, 10)
        assert horizontal_deviation(alpha, impulse(Fraction(1, 2))).value == Fraction(1, 2)
        assert vertical_deviation(alpha, impulse(Fraction(1, 2))).value == 10 + Fraction(3, 2)

    def test_deviation_kinds(self):
        alpha, beta = token_bucket(1, 1), rate_latency(1, 1)
        assert horizontal_deviation(alpha, beta).kind == 'horizontal'
        assert vertical_deviation(alpha, beta).kind == 'vertical'

    def test_non_concave_arrival_is_rejected(self):
        with pytest.raises(UnsupportedShapeError):
            vertical_deviation(rate_latency(1, 1), rate_latency(2, 1))

    @settings(max_examples=200, deadline=None)
    @given(concave_curves(), service_curves)
    def test_vertical_matches_grid(self, alpha, beta):
        value = vertical_deviation(alpha, beta).value
        if beta.is_finite and alpha.tail_slope > beta.tail_slope:
            assert value == INFINITY
            return
        gaps = [
            alpha.value_at(t) - beta.value_at(t)
            for t in range(_horizon(alpha, beta) + 1)
            if beta.value_at(t) != INFINITY
        ]
        assert value == max([Fraction(0)] + gaps)

    @settings(max_examples=200, deadline=None)
    @given(concave_curves(), service_curves)
    def test_horizontal_is_exact_on_grid(self, alpha, beta):
        value = horizontal_deviation(alpha, beta).value
        if beta.is_finite and alpha.tail_slope > beta.tail_slope:
            assert value == INFINITY
            return

        # Every breakpoint of alpha and every instant where alpha crosses a
        # breakpoint level of beta lies on this grid.
        slopes = [int(s) for s in alpha.slopes if s > 0]
        step = Fraction(1, lcm(*slopes)) if slopes else Fraction(1)
        grid = [k * step for k in range(int(_horizon(alpha, beta) / step) + 1)]

        worst = Fraction(0)
        for t in grid:
            level = alpha.value_at(t)
            worst = max(worst, _reach(beta, level) - t)
            if alpha.slope_at(t) > 0:
                # right limit: levels just above alpha(t)
                worst = max(worst, _reach(beta, level, strict=True) - t)
        assert value == worst


class TestDominance:
    def test_faster_and_earlier_dominates(self):
        assert dominates(rate_latency(2, 1), rate_latency(1, 1))
        assert dominates(rate_latency(2, 1), rate_latency(2, 3))
        assert not dominates(rate_latency(1, 1), rate_latency(2, 1))

    def test_crossing_curves_do_not_dominate(self):
        early_slow = rate_latency(1, 0)
        late_fast = rate_latency(10, 1)
        assert not dominates(early_slow, late_fast)
        assert not dominates(late_fast, early_slow)

    def test_impulse_dominates_equal_latency(self):
        assert dominates(impulse(1), rate_latency(5, 1))
        assert not dominates(rate_latency(5, 1), impulse(1))

    @given(st.one_of(concave_curves(), service_curves))
    def test_reflexive(self, f):
        assert dominates(f, f)

    @settings(max_examples=100, deadline=None)
    @given(service_curves, service_curves)
    def test_agrees_with_grid(self, f, g):
        if dominates(f, g):
            for k in range(4 * GRID):
                t = Fraction(k, 4)
                assert f.value_at(t) >= g.value_at(t)

    @settings(max_examples=150, deadline=None)
    @given(st.one_of(
        st.tuples(service_curves, service_curves),
        service_curves.map(lambda f: (f, Curve.build(f.breakpoints, f.infinite_after))),
    ))
    def test_antisymmetric(self, pair):
        f, g = pair
        if dominates(f, g) and dominates(g, f):
            for k in range(4 * GRID):
                t = Fraction(k, 4)
                assert f.value_at(t) == g.value_at(t)

    @settings(max_examples=150, deadline=None)
    @given(service_curves, service_curves, service_curves)
    def test_transitive(self, f, g, h):
        if dominates(f, g) and dominates(g, h):
            assert dominates(f, h)

    @given(
        st.lists(st.integers(1, 4), min_size=3, max_size=3),
        st.lists(st.integers(0, 6), min_size=3, max_size=3),
    )
    def test_rate_latency_chain(self, rates, latencies):
        f, g, h = (
            rate_latency(rate, latency)
            for rate, latency in zip(sorted(rates, reverse=True), sorted(latencies))
        )
        assert dominates(f, g)
        assert dominates(g, h)
        assert dominates(f, h)
