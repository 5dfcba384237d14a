"""
Guarantee Checkers
GR clocks, service-curve inequalities, bound violations and the full
verification suite over a simulated schedule
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain
from math import lcm
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from curve_algebra import Curve, InvalidParameterError, Value, as_fraction
from bounds import BacklogBound, BoundReport, GrGuarantee, Method, NotApplicable
from simulator import Packet, Schedule, StepFunction, Timeline, common_scale, to_ticks
from traffic import conformance_check

SUITE_SELECTIONS: Tuple[str, ...] = (
    'all', 'gr', 'sc', 'delay', 'backlog', 'conformance'
)


@dataclass(frozen=True)
class Observation:
    """
    One checked inequality.

    margin is the signed slack: bound - observed for upper bounds
    (delay, backlog, GR, conformance) and observed - required for service
    curves. It is negative exactly when the inequality fails.
    """

    kind: str
    check: str
    location: str
    observed: Value
    bound: Value
    margin: Value

    @property
    def violated(self) -> bool:
        return self.margin < 0


@dataclass
class Margins:
    """
    Signed slack of one check at every place it applies.

    margins[i] / scale is the slack at place i. describe(i, margin) builds
    the Observation for place i; it only runs for the tightest place and
    for failures.
    """

    check: str
    margins: List[Union[int, Fraction]]
    scale: int
    describe: Callable[[int, Fraction], Observation]

    def observation(self, i: int) -> Observation:
        return self.describe(i, Fraction(self.margins[i], self.scale))

    def tightest(self) -> Optional[Observation]:
        if not self.margins:
            return None
        lowest = min(range(len(self.margins)), key=self.margins.__getitem__)
        return self.observation(lowest)

    def failures(self) -> List[Observation]:
        return [self.observation(i) for i, m in enumerate(self.margins) if m < 0]


def _packet_label(packet: Packet) -> str:
    return f"packet {packet.order} (class {packet.class_id} #{packet.seq})"


def grc_clock(packets: Sequence[Tuple[object, object]], rate: object) -> List[Fraction]:
    """
    Guaranteed-rate clock of a flow.

    GRC_i = max(a_i, GRC_{i-1}) + l_i / R with GRC_0 = 0.

    Args:
        packets: (arrival, length) pairs in flow order.
        rate: Guaranteed rate R > 0.

    Raises:
        InvalidParameterError: If rate <= 0.
    """
    rate = as_fraction(rate)
    if rate <= 0:
        raise InvalidParameterError(f"GR clock needs rate > 0, got {rate}")
    clocks: List[Fraction] = []
    clock = Fraction(0)
    for arrival, length in packets:
        clock = max(as_fraction(arrival), clock) + as_fraction(length) / rate
        clocks.append(clock)
    return clocks


def _gr_margins(
    arrivals: Sequence[int],
    lengths: Sequence[int],
    departures: Sequence[int],
    time_scale: int,
    bit_scale: int,
    guarantee: GrGuarantee
) -> Tuple[List[int], int]:
    """
    GRC_i + E - d_i per packet, in units of 1 / scale seconds.

    The clock runs on ticks of 1 / (time_scale * k) seconds, with k the
    smallest factor that makes l / R and E whole ticks.
    """
    per_unit = Fraction(time_scale, bit_scale) / guarantee.rate
    error = guarantee.error * time_scale
    k = lcm(per_unit.denominator, error.denominator)
    per_unit, error = int(per_unit * k), int(error * k)

    margins: List[int] = []
    clock = 0
    for arrival, length, departure in zip(arrivals, lengths, departures):
        clock = max(arrival * k, clock) + length * per_unit
        margins.append(clock + error - departure * k)
    return margins, time_scale * k


def _gr_check(
    packets: Sequence[Packet],
    departures: Sequence[Fraction],
    ticks: Tuple[Sequence[int], Sequence[int], Sequence[int]],
    scales: Tuple[int, int],
    guarantee: GrGuarantee,
    check: str
) -> Margins:
    margins, scale = _gr_margins(*ticks, *scales, guarantee)

    def describe(i: int, margin: Fraction) -> Observation:
        observed = departures[i]
        return Observation('gr', check, _packet_label(packets[i]), observed,
                           observed + margin, margin)

    return Margins(check, margins, scale, describe)


def check_gr(
    packets: Sequence[Packet],
    departures: Sequence[object],
    guarantee: GrGuarantee,
    check: str = 'GR'
) -> List[Observation]:
    """Packets with d_i > GRC_i(R) + E."""
    departures = [as_fraction(d) for d in departures]
    arrivals = [p.arrival for p in packets]
    lengths = [p.length for p in packets]
    time_scale = common_scale(chain(arrivals, departures))
    bit_scale = common_scale(lengths)
    ticks = (
        to_ticks(arrivals, time_scale),
        to_ticks(lengths, bit_scale),
        to_ticks(departures, time_scale),
    )
    return _gr_check(
        packets, departures, ticks, (time_scale, bit_scale), guarantee, check
    ).failures()


def _starts(arrivals: StepFunction, stretch: int) -> List[Tuple[int, int]]:
    """(s, A(s-)) for s = 0 and every arrival instant, s in stretched ticks."""
    starts = [(0, 0)]
    before = 0
    for tick, value in zip(arrivals.ticks, arrivals.units):
        if tick > 0:
            starts.append((tick * stretch, before))
        before = value
    return starts


def _rate_latency_margins(
    arrivals: StepFunction,
    departures: StepFunction,
    rate: Optional[Fraction],
    latency: Fraction
) -> Tuple[List[int], int]:
    """
    A*(t-) - inf over s <= t of A(s-) + beta(t - s), beta = rate (t - latency)+.

    Both functions share their scales. Time is stretched so the latency is
    a whole tick and bits are widened so the rate is a whole number of
    units per tick. Windows no longer than the latency contribute
    A(max(t - latency, 0)-); longer windows contribute rate * cut plus the
    running minimum of A(s-) - rate * s over starts s < cut. rate None
    means an impulse curve, for which longer windows are infinite.
    """
    lag = as_fraction(latency) * departures.time_scale
    stretch = lag.denominator
    lag = lag.numerator
    if rate is None:
        widen, slope = 1, 0
    else:
        per_tick = as_fraction(rate) * departures.bit_scale / (
            departures.time_scale * stretch
        )
        widen, slope = per_tick.denominator, per_tick.numerator

    starts = _starts(arrivals, stretch)
    arrival_ticks = [tick * stretch for tick in arrivals.ticks]
    seen = position = 0
    running: Optional[int] = None
    observed = 0
    margins: List[int] = []
    for tick, after in zip(departures.ticks, departures.units):
        cut = tick * stretch - lag
        if cut <= 0:
            required = 0
        else:
            while seen < len(arrival_ticks) and arrival_ticks[seen] < cut:
                seen += 1
            required = (arrivals.units[seen - 1] if seen else 0) * widen
            if rate is not None:
                while position < len(starts) and starts[position][0] < cut:
                    s, before = starts[position]
                    key = before * widen - slope * s
                    if running is None or key < running:
                        running = key
                    position += 1
                required = min(required, slope * cut + running)
        margins.append(observed * widen - required)
        observed = after
    return margins, departures.bit_scale * widen


def _generic_margins(
    arrivals: StepFunction,
    departures: StepFunction,
    beta: Curve
) -> List[Value]:
    starts = [(Fraction(0), Fraction(0))] + [
        (t, arrivals.value_before(t)) for t in arrivals.times if t > 0
    ]
    margins: List[Value] = []
    for t in departures.times:
        candidates: List[Value] = [
            before + beta.value_at(t - s) for s, before in starts if s <= t
        ]
        candidates.append(arrivals.value_before(t) + beta.value_at(0))
        margins.append(departures.value_before(t) - min(candidates))
    return margins


def _service_check(
    arrivals: StepFunction,
    departures: StepFunction,
    beta: Curve,
    check: str
) -> Margins:
    time_scale = lcm(arrivals.time_scale, departures.time_scale)
    bit_scale = lcm(arrivals.bit_scale, departures.bit_scale)
    arrivals = arrivals.rescaled(time_scale, bit_scale)
    departures = departures.rescaled(time_scale, bit_scale)

    params = beta.rate_latency_params
    if params is not None:
        margins, scale = _rate_latency_margins(arrivals, departures, *params)
    else:
        margins, scale = _generic_margins(arrivals, departures, beta), 1

    def describe(i: int, margin: Fraction) -> Observation:
        observed = Fraction(departures.units[i - 1], bit_scale) if i else Fraction(0)
        return Observation(
            'service-curve', check, f"t={Fraction(departures.ticks[i], time_scale)}",
            observed, observed - margin, margin
        )

    return Margins(check, margins, scale, describe)


def check_service_curve(
    arrivals: StepFunction,
    departures: StepFunction,
    beta: Curve,
    check: str = 'service curve'
) -> List[Observation]:
    """
    Instants where A* < A (x) beta.

    The inequality is taken on left limits, A*(t-) >= inf_s A(s-) +
    beta(t - s), at every departure instant t; between departures A*(t-)
    is constant while the right side only grows, so these instants cover
    every real t. The infimum is attained at s = 0, at an arrival instant
    or at s = t.
    """
    return _service_check(arrivals, departures, beta, check).failures()


def _delay_check(schedule: Schedule, bound: Fraction, check: str,
                 class_id: Optional[int] = None) -> Margins:
    line = schedule.timeline
    members = line.members(class_id)
    limit = as_fraction(bound) * line.time_scale
    k = limit.denominator
    margins = [
        limit.numerator - (line.departures[i] - line.arrivals[i]) * k
        for i in members
    ]

    def describe(j: int, margin: Fraction) -> Observation:
        i = members[j]
        packet = schedule.trace.packets[i]
        return Observation('delay', check, _packet_label(packet),
                           schedule.departures[i] - packet.arrival, bound, margin)

    return Margins(check, margins, line.time_scale * k, describe)


def _backlog_check(process: StepFunction, bound: Fraction, check: str) -> Margins:
    limit = as_fraction(bound) * process.bit_scale
    k = limit.denominator
    peak = process.peak_index
    # an empty process peaks at 0 bits at t = 0
    held = 0 if peak is None else process.units[peak]
    margins = [limit.numerator - held * k]

    def describe(_: int, margin: Fraction) -> Observation:
        peak_at = Fraction(0) if peak is None else process.times[peak]
        return Observation('backlog', check, f"t={peak_at}", process.supremum,
                           bound, margin)

    return Margins(check, margins, process.bit_scale * k, describe)


def _bound_checks(
    schedule: Schedule,
    report: BoundReport,
    kinds: Sequence[str]
) -> Iterator[Margins]:
    line: Timeline = schedule.timeline
    for method in Method:
        bounds = report.bounds(method)
        label = method.value

        if 'delay' in kinds and not isinstance(bounds.delay, NotApplicable):
            yield _delay_check(schedule, bounds.delay, f"delay ({label})")
        if 'backlog' in kinds and isinstance(bounds.backlog, BacklogBound):
            yield _backlog_check(line.backlog(), bounds.backlog.value,
                                 f"backlog ({label})")

        for entry in bounds.classes:
            n = entry.class_id
            if 'delay' in kinds and not isinstance(entry.delay, NotApplicable):
                yield _delay_check(schedule, entry.delay,
                                   f"class {n} delay ({label})", n)
            if 'backlog' in kinds and not isinstance(entry.backlog, NotApplicable):
                yield _backlog_check(line.backlog(n), entry.backlog,
                                     f"class {n} backlog ({label})")


def check_bounds(schedule: Schedule, report: BoundReport) -> List[Observation]:
    """
    Compare every packet delay and the backlog supremum with the report.

    Bounds marked not applicable are skipped, for both methods and for
    the per-class delay and backlog bounds.
    """
    return [
        failure
        for margins in _bound_checks(schedule, report, ('delay', 'backlog'))
        for failure in margins.failures()
    ]


@dataclass
class SuiteResult:
    violations: List[Observation] = field(default_factory=list)
    tightest: Dict[str, Observation] = field(default_factory=dict)
    checks_run: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, checks: Iterable[Margins]) -> None:
        for margins in checks:
            if margins.check not in self.checks_run:
                self.checks_run.append(margins.check)
            tightest = margins.tightest()
            if tightest is None:
                continue
            current = self.tightest.get(margins.check)
            if current is None or tightest.margin < current.margin:
                self.tightest[margins.check] = tightest
            self.violations.extend(margins.failures())


def _guarantee_checks(
    schedule: Schedule,
    report: BoundReport,
    want_gr: bool,
    want_sc: bool
) -> Iterator[Margins]:
    trace = schedule.trace
    line: Timeline = schedule.timeline
    scales = (line.time_scale, line.bit_scale)

    def gr(members: Sequence[int], guarantee: GrGuarantee, check: str) -> Margins:
        ticks = (
            [line.arrivals[i] for i in members],
            [line.lengths[i] for i in members],
            [line.departures[i] for i in members],
        )
        packets = [trace.packets[i] for i in members]
        departures = [schedule.departures[i] for i in members]
        return _gr_check(packets, departures, ticks, scales, guarantee, check)

    if want_gr:
        yield gr(line.members(), report.aggregate_guarantee,
                 'aggregate GR (rate C_min)')
    if want_sc:
        yield _service_check(
            line.arrival_steps(), line.departure_steps(),
            report.aggregate_service_curve, 'aggregate service curve'
        )

    for n in trace.config.class_ids:
        for method in Method:
            entry = report.bounds(method).for_class(n)
            label = method.value
            if want_gr and isinstance(entry.guarantee, GrGuarantee):
                yield gr(line.members(n), entry.guarantee, f"class {n} GR ({label})")
            if want_sc and isinstance(entry.service_curve, Curve):
                yield _service_check(
                    line.arrival_steps(n), line.departure_steps(n),
                    entry.service_curve, f"class {n} service curve ({label})"
                )


def _conformance(schedule: Schedule) -> Iterator[Margins]:
    found = conformance_check(schedule.trace)
    if found is None:
        return

    def describe(_: int, margin: Fraction) -> Observation:
        return Observation(
            'conformance', 'conformance',
            f"class {found.class_id} window [{found.start}, {found.end}]",
            found.bits, found.allowed, margin
        )

    yield Margins('conformance', [found.allowed - found.bits], 1, describe)


def run_suite(
    schedule: Schedule,
    report: BoundReport,
    which: str = 'all'
) -> SuiteResult:
    """
    Run every applicable check on a schedule.

    Step functions and member lists come from schedule.timeline, so each
    is built once however many checks read it.

    Args:
        schedule: Simulated (or externally supplied) schedule.
        report: Bounds of the schedule's system.
        which: One of all, gr, sc, delay, backlog, conformance.

    Returns:
        SuiteResult with violations, the tightest observation per check
        and the checks that ran.

    Raises:
        ValueError: On an unknown selection.
    """
    if which not in SUITE_SELECTIONS:
        raise ValueError(
            f"unknown check selection {which!r}, expected one of {SUITE_SELECTIONS}"
        )
    everything = which == 'all'
    result = SuiteResult()

    if everything or which == 'conformance':
        result.checks_run.append('conformance')
        result.record(_conformance(schedule))

    result.record(_guarantee_checks(
        schedule, report,
        want_gr=everything or which == 'gr',
        want_sc=everything or which == 'sc'
    ))

    kinds = [k for k in ('delay', 'backlog') if everything or which == k]
    if kinds:
        result.record(_bound_checks(schedule, report, kinds))
    return result
