"""
Exact Piecewise-Linear Min-Plus Algebra
Arrival curves, service curves, convolution and deviations over Fractions
"""

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import inf
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

Number = Union[Fraction, int, str, float]
Value = Union[Fraction, float]

INFINITY: float = inf


class CurveError(ValueError):
    """Base error for curve construction and curve algebra."""


class InvalidParameterError(CurveError):
    """A constructor or operation received an out-of-range parameter."""


class UnsupportedShapeError(CurveError):
    """The operation has no exact closed form for these curve shapes."""


def as_fraction(value: Number) -> Fraction:
    """
    Convert a number to an exact Fraction.

    Floats go through their shortest decimal repr, so 0.11 becomes 11/100
    rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if value != value or value in (inf, -inf):
            raise InvalidParameterError(f"not a finite number: {value}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class Curve:
    """
    Non-decreasing piecewise-linear function on t >= 0.

    Each breakpoint is (t, value, slope): the value at t and the slope
    until the next breakpoint (the last slope extends to infinity). When
    infinite_after is set the curve equals infinity for t > infinite_after.
    Always build through Curve.build so the form stays canonical.
    """

    breakpoints: Tuple[Tuple[Fraction, Fraction, Fraction], ...]
    infinite_after: Optional[Fraction] = None

    @classmethod
    def build(
        cls,
        breakpoints: Iterable[Tuple[Number, Number, Number]],
        infinite_after: Optional[Number] = None
    ) -> 'Curve':
        """
        Validate breakpoints and return the canonical curve.

        Args:
            breakpoints: (t, value, slope) triples starting at t = 0.
            infinite_after: Threshold after which the curve is infinite.

        Returns:
            Curve with collinear segments merged.
        """
        points: List[Tuple[Fraction, Fraction, Fraction]] = [
            (as_fraction(t), as_fraction(v), as_fraction(s))
            for t, v, s in breakpoints
        ]
        threshold: Optional[Fraction] = (
            None if infinite_after is None else as_fraction(infinite_after)
        )

        if not points or points[0][0] != 0:
            raise InvalidParameterError("curve must start at t = 0")
        if threshold is not None:
            if threshold < 0:
                raise InvalidParameterError(
                    f"infinite tail threshold must be >= 0, got {threshold}"
                )
            points = [points[0]] + [p for p in points[1:] if p[0] < threshold]

        if points[0][1] < 0:
            raise InvalidParameterError("curve value at t = 0 must be >= 0")
        for t, _, slope in points:
            if slope < 0:
                raise InvalidParameterError(
                    f"negative slope {slope} at t = {t}: curve must be "
                    "non-decreasing"
                )
        for (t0, v0, s0), (t1, v1, _) in zip(points, points[1:]):
            if t1 <= t0:
                raise InvalidParameterError(
                    "breakpoint times must be strictly increasing"
                )
            if v1 != v0 + s0 * (t1 - t0):
                raise InvalidParameterError(
                    f"curve is discontinuous at t = {t1}"
                )

        merged = [points[0]]
        for point in points[1:]:
            if point[2] != merged[-1][2]:
                merged.append(point)

        if threshold is not None and merged[-1][0] == threshold:
            # Zero-length finite part; its slope is meaningless.
            t, v, _ = merged[-1]
            merged[-1] = (t, v, Fraction(0))

        return cls(tuple(merged), threshold)

    @cached_property
    def times(self) -> Tuple[Fraction, ...]:
        return tuple(t for t, _, _ in self.breakpoints)

    @property
    def is_finite(self) -> bool:
        return self.infinite_after is None

    @property
    def tail_slope(self) -> Optional[Fraction]:
        """Slope of the unbounded last segment, None for infinite tails."""
        if not self.is_finite:
            return None
        return self.breakpoints[-1][2]

    @property
    def slopes(self) -> Tuple[Fraction, ...]:
        return tuple(s for _, _, s in self.breakpoints)

    @property
    def is_concave(self) -> bool:
        slopes = self.slopes
        return self.is_finite and all(
            a >= b for a, b in zip(slopes, slopes[1:])
        )

    @property
    def is_convex(self) -> bool:
        slopes = self.slopes
        return all(a <= b for a, b in zip(slopes, slopes[1:]))

    @property
    def rate_latency_params(self) -> Optional[Tuple[Optional[Fraction], Fraction]]:
        """
        (rate, latency) if this is a rate-latency shaped curve.

        Rate None stands for the impulse curve (infinite rate). The zero
        curve is reported as (0, 0).
        """
        zero = Fraction(0)
        if self.breakpoints[0][:2] != (zero, zero):
            return None
        if not self.is_finite:
            if len(self.breakpoints) == 1 and self.breakpoints[0][2] == 0:
                return None, self.infinite_after
            return None
        if len(self.breakpoints) == 1:
            return self.breakpoints[0][2], zero
        if len(self.breakpoints) == 2 and self.breakpoints[0][2] == 0:
            latency, value, rate = self.breakpoints[1]
            if value == 0:
                return rate, latency
        return None

    def value_at(self, t: Number) -> Value:
        """Exact value at t, or INFINITY past the tail threshold."""
        t = as_fraction(t)
        if t < 0:
            raise InvalidParameterError(f"curve evaluated at negative t = {t}")
        if self.infinite_after is not None and t > self.infinite_after:
            return INFINITY
        t0, v0, s0 = self.breakpoints[bisect_right(self.times, t) - 1]
        return v0 + s0 * (t - t0)

    def slope_at(self, t: Fraction) -> Fraction:
        """Slope of the segment starting at or before t (right derivative)."""
        return self.breakpoints[bisect_right(self.times, t) - 1][2]

    def to_record(self) -> Dict[str, Any]:
        """Serialize with exact rationals as 'p/q' strings."""
        if self.is_finite:
            tail: Dict[str, Any] = {
                'kind': 'slope',
                'slope': str(self.breakpoints[-1][2])
            }
        else:
            tail = {'kind': 'infinite', 'threshold': str(self.infinite_after)}
        return {
            'breakpoints': [
                [str(t), str(v), str(s)] for t, v, s in self.breakpoints
            ],
            'tail': tail
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> 'Curve':
        """Inverse of to_record."""
        tail = record['tail']
        threshold = tail['threshold'] if tail['kind'] == 'infinite' else None
        return cls.build(
            [tuple(point) for point in record['breakpoints']],
            threshold
        )

    def __str__(self) -> str:
        params = self.rate_latency_params
        if params is not None:
            rate, latency = params
            if rate is None:
                return f"delta_{latency}"
            return f"{rate} . (t - {latency})+"
        if len(self.breakpoints) == 1 and self.is_finite:
            _, burst, rate = self.breakpoints[0]
            return f"{rate} t + {burst}"
        return f"<Curve {self.to_record()}>"


@dataclass(frozen=True)
class Deviation:
    """Result of a horizontal (seconds) or vertical (bits) deviation."""

    kind: str
    value: Value

    @property
    def is_infinite(self) -> bool:
        return self.value == INFINITY


def token_bucket(rate: Number, burst: Number) -> Curve:
    """
    Leaky-bucket arrival curve alpha(t) = rate * t + burst.

    The burst is present at window length zero: alpha(0) = burst.
    """
    rate, burst = as_fraction(rate), as_fraction(burst)
    if rate < 0 or burst < 0:
        raise InvalidParameterError(
            f"token bucket needs rate >= 0 and burst >= 0, "
            f"got rate={rate}, burst={burst}"
        )
    return Curve.build([(0, burst, rate)])


def rate_latency(rate: Number, latency: Number) -> Curve:
    """Service curve beta(t) = rate * (t - latency)+."""
    rate, latency = as_fraction(rate), as_fraction(latency)
    if rate <= 0:
        raise InvalidParameterError(f"rate-latency needs rate > 0, got {rate}")
    if latency < 0:
        raise InvalidParameterError(
            f"rate-latency needs latency >= 0, got {latency}"
        )
    if latency == 0:
        return Curve.build([(0, 0, rate)])
    return Curve.build([(0, 0, 0), (latency, 0, rate)])


def impulse(delay: Number) -> Curve:
    """Pure delay curve: 0 on [0, delay], infinite afterwards."""
    delay = as_fraction(delay)
    if delay < 0:
        raise InvalidParameterError(f"impulse needs delay >= 0, got {delay}")
    return Curve.build([(0, 0, 0)], infinite_after=delay)


def evaluate(curve: Curve, t: Number) -> Value:
    """Exact value of curve at t."""
    return curve.value_at(t)


def _shift(curve: Curve, delay: Fraction) -> Curve:
    """Hold curve(0) on [0, delay] and run curve(t - delay) afterwards."""
    if delay == 0:
        return curve
    points = [(Fraction(0), curve.breakpoints[0][1], Fraction(0))]
    points += [(t + delay, v, s) for t, v, s in curve.breakpoints]
    threshold = (
        None if curve.infinite_after is None
        else curve.infinite_after + delay
    )
    return Curve.build(points, threshold)


def _lift(curve: Curve, amount: Fraction) -> Curve:
    return Curve.build(
        [(t, v + amount, s) for t, v, s in curve.breakpoints],
        curve.infinite_after
    )


def _lower_envelope(f: Curve, g: Curve) -> Curve:
    """Pointwise minimum of two finite curves, crossings included."""
    cuts = sorted(set(f.times) | set(g.times))
    points: List[Tuple[Fraction, Fraction, Fraction]] = []

    for i, start in enumerate(cuts):
        end = cuts[i + 1] if i + 1 < len(cuts) else None
        fa, ga = f.value_at(start), g.value_at(start)
        sf, sg = f.slope_at(start), g.slope_at(start)

        if fa < ga or (fa == ga and sf <= sg):
            points.append((start, fa, sf))
        else:
            points.append((start, ga, sg))

        if fa != ga and sf != sg:
            crossing = start + (ga - fa) / (sf - sg)
            if crossing > start and (end is None or crossing < end):
                points.append((crossing, f.value_at(crossing), min(sf, sg)))

    return Curve.build(points)


def _segments(curve: Curve) -> List[Tuple[Fraction, Optional[Fraction]]]:
    """(slope, length) pieces of a curve; length None means unbounded."""
    pieces: List[Tuple[Fraction, Optional[Fraction]]] = []
    bps = curve.breakpoints
    for (t0, _, s0), (t1, _, _) in zip(bps, bps[1:]):
        pieces.append((s0, t1 - t0))
    t_last, _, s_last = bps[-1]
    if curve.is_finite:
        pieces.append((s_last, None))
    elif curve.infinite_after > t_last:
        pieces.append((s_last, curve.infinite_after - t_last))
    return pieces


def _convolve_convex(f: Curve, g: Curve) -> Curve:
    """Slope-merging convolution of two convex curves."""
    pieces = sorted(_segments(f) + _segments(g), key=lambda piece: piece[0])
    t = Fraction(0)
    value = f.breakpoints[0][1] + g.breakpoints[0][1]
    points: List[Tuple[Fraction, Fraction, Fraction]] = []

    for slope, length in pieces:
        points.append((t, value, slope))
        if length is None:
            return Curve.build(points)
        t += length
        value += slope * length

    # Both curves have infinite tails.
    points.append((t, value, Fraction(0)))
    return Curve.build(points, infinite_after=t)


def _convolve_concave(f: Curve, g: Curve) -> Curve:
    # inf over s of f(t - s) + g(s) is concave in s: an endpoint wins.
    return _lower_envelope(
        _lift(f, g.breakpoints[0][1]),
        _lift(g, f.breakpoints[0][1])
    )


def _convolve_concave_rate_latency(f: Curve, beta: Curve) -> Curve:
    rate, latency = beta.rate_latency_params
    if rate is None:
        return _shift(f, latency)
    envelope = _lower_envelope(f, token_bucket(rate, f.breakpoints[0][1]))
    return _shift(envelope, latency)


def min_plus_conv(f: Curve, g: Curve) -> Curve:
    """
    Min-plus convolution (f * g)(t) = inf_{0<=s<=t} f(s) + g(t - s).

    Supported shapes: two convex curves (slope merging), two concave
    curves, and a concave curve with a rate-latency or impulse curve.

    Raises:
        UnsupportedShapeError: For any other combination.
    """
    if f.is_convex and g.is_convex:
        return _convolve_convex(f, g)
    if f.is_concave and g.is_concave:
        return _convolve_concave(f, g)
    if f.is_concave and g.rate_latency_params is not None:
        return _convolve_concave_rate_latency(f, g)
    if g.is_concave and f.rate_latency_params is not None:
        return _convolve_concave_rate_latency(g, f)
    raise UnsupportedShapeError(
        "min-plus convolution supports convex*convex, concave*concave and "
        "concave*rate-latency curves only"
    )


def _lower_inverse(curve: Curve, level: Fraction) -> Value:
    """inf{s >= 0 : curve(s) >= level}, INFINITY if never reached."""
    if curve.breakpoints[0][1] >= level:
        return Fraction(0)
    bps = curve.breakpoints
    for i, (t0, v0, s0) in enumerate(bps):
        if i + 1 < len(bps):
            end: Optional[Fraction] = bps[i + 1][0]
        else:
            end = curve.infinite_after
        if end is None:
            if s0 > 0:
                return t0 + (level - v0) / s0
            return INFINITY
        if v0 + s0 * (end - t0) >= level:
            return t0 + (level - v0) / s0
    return curve.infinite_after


def _upper_inverse(curve: Curve, level: Fraction) -> Value:
    """sup{s >= 0 : curve(s) <= level}, INFINITY if unbounded."""
    if curve.breakpoints[0][1] > level:
        return Fraction(0)
    bps = curve.breakpoints
    for i, (t0, v0, s0) in enumerate(bps):
        if i + 1 < len(bps):
            end: Optional[Fraction] = bps[i + 1][0]
        else:
            end = curve.infinite_after
        if end is None:
            if s0 > 0:
                return t0 + (level - v0) / s0
            return INFINITY
        if v0 + s0 * (end - t0) > level:
            return t0 + (level - v0) / s0
    return curve.infinite_after


def _require_deviation_shapes(alpha: Curve, beta: Curve) -> None:
    if not alpha.is_concave or not beta.is_convex:
        raise UnsupportedShapeError(
            "deviations need a finite concave arrival curve and a convex "
            "service curve"
        )


def horizontal_deviation(alpha: Curve, beta: Curve) -> Deviation:
    """
    sup_t inf{tau >= 0 : alpha(t) <= beta(t + tau)}: the delay bound.

    The gap is piecewise linear between breakpoints of alpha and the times
    where alpha crosses a breakpoint value of beta, so the supremum is
    found among those points (right limits included) or on the tail.
    """
    _require_deviation_shapes(alpha, beta)

    levels = {v for _, v, _ in beta.breakpoints}
    if beta.infinite_after is not None:
        levels.add(beta.value_at(beta.infinite_after))
    candidates = set(alpha.times)
    for level in levels:
        t = _lower_inverse(alpha, level)
        if t != INFINITY:
            candidates.add(t)

    best: Value = Fraction(0)
    for t in sorted(candidates):
        level = alpha.value_at(t)
        reach = _lower_inverse(beta, level)
        if alpha.slope_at(t) > 0:
            reach = max(reach, _upper_inverse(beta, level))
        if reach == INFINITY:
            return Deviation('horizontal', INFINITY)
        best = max(best, reach - t)

    if beta.is_finite and alpha.tail_slope > beta.tail_slope:
        return Deviation('horizontal', INFINITY)
    return Deviation('horizontal', best)


def vertical_deviation(alpha: Curve, beta: Curve) -> Deviation:
    """sup_t alpha(t) - beta(t): the backlog bound."""
    _require_deviation_shapes(alpha, beta)

    candidates = set(alpha.times) | set(beta.times)
    if beta.infinite_after is not None:
        candidates.add(beta.infinite_after)

    best: Value = Fraction(0)
    for t in candidates:
        service = beta.value_at(t)
        if service != INFINITY:
            best = max(best, alpha.value_at(t) - service)

    if beta.is_finite and alpha.tail_slope > beta.tail_slope:
        return Deviation('vertical', INFINITY)
    return Deviation('vertical', best)


def dominates(f: Curve, g: Curve) -> bool:
    """True iff f(t) >= g(t) for every t >= 0, decided exactly."""
    cuts = set(f.times) | set(g.times)
    for curve in (f, g):
        if curve.infinite_after is not None:
            cuts.add(curve.infinite_after)
    ordered: Sequence[Fraction] = sorted(cuts)

    # Both curves are linear (or infinite) strictly between cuts, so the
    # cuts plus one interior sample per gap decide the comparison.
    samples = list(ordered)
    samples += [(a + b) / 2 for a, b in zip(ordered, ordered[1:])]
    samples.append(ordered[-1] + 1)
    for t in samples:
        if f.value_at(t) < g.value_at(t):
            return False

    if f.is_finite and g.is_finite:
        return f.tail_slope >= g.tail_slope
    return True
