"""
Performance Bounds for the Multiclass FIFO System
Direct bounds (aggregate GR at C_min) and improved bounds (per-class rates),
plus the side-by-side comparison report
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple, Union

from curve_algebra import (
    INFINITY,
    Curve,
    Deviation,
    InvalidParameterError,
    dominates,
    horizontal_deviation,
    impulse,
    rate_latency,
    token_bucket,
    vertical_deviation,
)
from system_model import SystemConfig, Utilization, utilization


class Method(str, Enum):
    DIRECT = 'direct'
    IMPROVED = 'improved'


@dataclass(frozen=True)
class NotApplicable:
    """A bound whose precondition fails, with the violated condition."""

    reason: str

    def __str__(self) -> str:
        return f"not applicable: {self.reason}"


@dataclass(frozen=True)
class GrGuarantee:
    """Guaranteed-rate server: d <= GRC(rate) + error for every packet."""

    rate: Fraction
    error: Fraction
    scope: Union[str, int] = 'aggregate'

    def __post_init__(self) -> None:
        if self.rate <= 0 or self.error < 0:
            raise InvalidParameterError(
                f"GR guarantee needs rate > 0 and error >= 0, "
                f"got rate={self.rate}, error={self.error}"
            )


@dataclass(frozen=True)
class BacklogBound:
    """
    Backlog bound with its parts kept.

    For the improved method, envelope_part is the aggregate arrival curve
    against the delay-bound impulse curve and reference_part is the
    normalized unit-rate system scaled by C_max. The direct method has a
    single expression and no reference part.
    """

    envelope_part: Fraction
    reference_part: Optional[Fraction] = None

    @property
    def value(self) -> Fraction:
        if self.reference_part is None:
            return self.envelope_part
        return min(self.envelope_part, self.reference_part)

    @property
    def winner(self) -> str:
        if self.reference_part is None:
            return 'single'
        if self.reference_part < self.envelope_part:
            return 'reference'
        return 'envelope'


Outcome = Union[Fraction, NotApplicable]


@dataclass(frozen=True)
class ClassBounds:
    class_id: int
    guarantee: Union[GrGuarantee, NotApplicable]
    service_curve: Union[Curve, NotApplicable]
    delay: Outcome
    backlog: Outcome


@dataclass(frozen=True)
class MethodBounds:
    method: Method
    delay: Outcome
    backlog: Union[BacklogBound, NotApplicable]
    classes: Tuple[ClassBounds, ...]

    def for_class(self, class_id: int) -> ClassBounds:
        for bounds in self.classes:
            if bounds.class_id == class_id:
                return bounds
        raise KeyError(f"no traffic class {class_id}")


@dataclass(frozen=True)
class ClassComparison:
    """
    Improved versus direct for one class.

    Fields are None when either method does not apply. The GR fields are
    descriptive: they record what happened, they are not asserted.
    """

    class_id: int
    service_curve_dominates: Optional[bool]
    rate_not_lower: Optional[bool]
    error_not_higher: Optional[bool]


@dataclass(frozen=True)
class BoundReport:
    system: str
    utilization: Utilization
    aggregate_guarantee: GrGuarantee
    aggregate_service_curve: Curve
    direct: MethodBounds
    improved: MethodBounds
    comparisons: Tuple[ClassComparison, ...]

    def bounds(self, method: Method) -> MethodBounds:
        return self.direct if Method(method) is Method.DIRECT else self.improved

    @property
    def stability(self) -> str:
        rho = self.utilization.rho
        if rho < 1:
            return 'stable (rho < 1)'
        if rho == 1:
            return 'critically loaded (rho = 1): bounds hold, no slack'
        return 'overloaded (rho > 1): no finite bounds'


def _sum(values) -> Fraction:
    return sum(values, Fraction(0))


def _finite(deviation: Deviation) -> Fraction:
    if deviation.value == INFINITY:
        raise ArithmeticError(f"unexpected infinite {deviation.kind} deviation")
    return deviation.value


def _direct_condition(config: SystemConfig) -> Optional[NotApplicable]:
    if config.total_rate > config.c_min:
        return NotApplicable(
            f"sum of rates {config.total_rate} > C_min {config.c_min}"
        )
    return None


def _improved_condition(config: SystemConfig) -> Optional[NotApplicable]:
    rho = utilization(config).rho
    if rho > 1:
        return NotApplicable(f"rho = {rho} > 1")
    return None


def aggregate_gr(config: SystemConfig) -> GrGuarantee:
    """The whole system is a GR server with rate C_min and zero error."""
    return GrGuarantee(rate=config.c_min, error=Fraction(0), scope='aggregate')


def aggregate_service_curve(config: SystemConfig) -> Curve:
    """(C_min t - L)+ for the aggregate input."""
    return rate_latency(config.c_min, config.max_packet / config.c_min)


def gr_to_service_curve(guarantee: GrGuarantee, max_packet: Fraction) -> Curve:
    """A GR server (R, E) offers the service curve R (t - E - L/R)+."""
    return rate_latency(
        guarantee.rate,
        guarantee.error + Fraction(max_packet) / guarantee.rate
    )


def delay_bound(config: SystemConfig, method: Method) -> Outcome:
    """
    Worst-case delay of any packet.

    Args:
        config: Validated system config.
        method: DIRECT needs sum r_n <= C_min and gives sum sigma_n / C_min;
            IMPROVED needs rho <= 1 and gives sum sigma_n / C_n (tight).
    """
    if Method(method) is Method.DIRECT:
        failed = _direct_condition(config)
        if failed:
            return failed
        return config.total_burst / config.c_min

    failed = _improved_condition(config)
    if failed:
        return failed
    return _sum(spec.burst / spec.capacity for spec in config.classes)


def backlog_bound(
    config: SystemConfig,
    method: Method
) -> Union[BacklogBound, NotApplicable]:
    """
    Worst-case backlog B(t) = A(t) - A*(t).

    Both methods go through the curve algebra: the aggregate token bucket
    against the aggregate service curve (direct), and for the improved
    method the minimum of the impulse-curve part and the normalized
    reference-system part.
    """
    arrival = token_bucket(config.total_rate, config.total_burst)

    if Method(method) is Method.DIRECT:
        failed = _direct_condition(config)
        if failed:
            return failed
        return BacklogBound(
            _finite(vertical_deviation(arrival, aggregate_service_curve(config)))
        )

    failed = _improved_condition(config)
    if failed:
        return failed

    normalized_burst = _sum(s.burst / s.capacity for s in config.classes)
    envelope = _finite(vertical_deviation(arrival, impulse(normalized_burst)))

    longest = max(s.max_packet / s.capacity for s in config.classes)
    reference = _finite(vertical_deviation(
        token_bucket(utilization(config).rho, normalized_burst),
        rate_latency(1, longest)
    ))
    return BacklogBound(envelope, config.c_max * reference)


def class_gr(
    config: SystemConfig,
    class_id: int,
    method: Method
) -> Union[GrGuarantee, NotApplicable]:
    """
    GR guarantee to one traffic class.

    DIRECT needs sum_{m != n} r_m < C_min: rate C_min - sum r_m.
    IMPROVED needs rho_bar < 1: rate (1 - rho_bar) C_n.
    """
    spec = config.spec(class_id)
    others = config.others(class_id)
    other_burst = _sum(s.burst for s in others)

    if Method(method) is Method.DIRECT:
        other_rate = _sum(s.rate for s in others)
        if other_rate >= config.c_min:
            return NotApplicable(
                f"sum of other classes' rates {other_rate} >= "
                f"C_min {config.c_min}"
            )
        rate = config.c_min - other_rate
        return GrGuarantee(
            rate=rate,
            error=(other_burst + config.max_packet) / rate,
            scope=class_id
        )

    rho_bar = utilization(config).without(class_id)
    if rho_bar >= 1:
        return NotApplicable(f"rho_bar({class_id}) = {rho_bar} >= 1")
    share = 1 - rho_bar
    return GrGuarantee(
        rate=share * spec.capacity,
        error=_sum(s.burst / (share * s.capacity) for s in others),
        scope=class_id
    )


def class_service_curve(
    config: SystemConfig,
    class_id: int,
    method: Method
) -> Union[Curve, NotApplicable]:
    """Rate-latency service curve to one class, same conditions as class_gr."""
    guarantee = class_gr(config, class_id, method)
    if isinstance(guarantee, NotApplicable):
        return guarantee

    spec = config.spec(class_id)
    other_burst = _sum(s.burst for s in config.others(class_id))
    if Method(method) is Method.DIRECT:
        latency = (config.max_packet + other_burst) / guarantee.rate
    else:
        weighted = _sum(s.burst / s.capacity for s in config.others(class_id))
        latency = (spec.max_packet + spec.capacity * weighted) / guarantee.rate
    return rate_latency(guarantee.rate, latency)


def _class_deviation(
    config: SystemConfig,
    class_id: int,
    method: Method,
    vertical: bool
) -> Outcome:
    curve = class_service_curve(config, class_id, method)
    if isinstance(curve, NotApplicable):
        return curve
    spec = config.spec(class_id)
    if spec.rate > curve.tail_slope:
        return NotApplicable(
            f"class {class_id} rate {spec.rate} exceeds its service rate "
            f"{curve.tail_slope}"
        )
    arrival = token_bucket(spec.rate, spec.burst)
    deviation = (
        vertical_deviation(arrival, curve) if vertical
        else horizontal_deviation(arrival, curve)
    )
    return _finite(deviation)


def class_delay_bound(config: SystemConfig, class_id: int, method: Method) -> Outcome:
    """Delay bound of one class from its arrival and service curves."""
    return _class_deviation(config, class_id, method, vertical=False)


def class_backlog_bound(config: SystemConfig, class_id: int, method: Method) -> Outcome:
    """Backlog bound of one class from its arrival and service curves."""
    return _class_deviation(config, class_id, method, vertical=True)


def method_bounds(config: SystemConfig, method: Method) -> MethodBounds:
    """Every bound one method yields for config."""
    method = Method(method)
    return MethodBounds(
        method=method,
        delay=delay_bound(config, method),
        backlog=backlog_bound(config, method),
        classes=tuple(
            ClassBounds(
                class_id=class_id,
                guarantee=class_gr(config, class_id, method),
                service_curve=class_service_curve(config, class_id, method),
                delay=class_delay_bound(config, class_id, method),
                backlog=class_backlog_bound(config, class_id, method),
            )
            for class_id in config.class_ids
        )
    )


def _compare_class(direct: ClassBounds, improved: ClassBounds) -> ClassComparison:
    curves_known = not (
        isinstance(direct.service_curve, NotApplicable) or
        isinstance(improved.service_curve, NotApplicable)
    )
    rates_known = not (
        isinstance(direct.guarantee, NotApplicable) or
        isinstance(improved.guarantee, NotApplicable)
    )
    return ClassComparison(
        class_id=direct.class_id,
        service_curve_dominates=(
            dominates(improved.service_curve, direct.service_curve)
            if curves_known else None
        ),
        rate_not_lower=(
            improved.guarantee.rate >= direct.guarantee.rate
            if rates_known else None
        ),
        error_not_higher=(
            improved.guarantee.error <= direct.guarantee.error
            if rates_known else None
        ),
    )


def compare(config: SystemConfig) -> BoundReport:
    """
    Compute both methods and compare them class by class.

    Args:
        config: Validated system config.

    Returns:
        BoundReport with not-applicable entries carrying their reasons.
    """
    direct = method_bounds(config, Method.DIRECT)
    improved = method_bounds(config, Method.IMPROVED)
    return BoundReport(
        system=config.name,
        utilization=utilization(config),
        aggregate_guarantee=aggregate_gr(config),
        aggregate_service_curve=aggregate_service_curve(config),
        direct=direct,
        improved=improved,
        comparisons=tuple(
            _compare_class(direct.for_class(n), improved.for_class(n))
            for n in config.class_ids
        )
    )
