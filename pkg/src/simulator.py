"""
Multiclass FIFO Simulator
Exact departure recursion, backlog processes, the normalized unit-rate
reference system, and trace/schedule file IO
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import accumulate, chain
from math import ceil, floor, lcm
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from curve_algebra import as_fraction
from system_model import ClassSpec, SystemConfig, parse_quantity

TRACE_COLUMNS: Tuple[str, ...] = ('arrival_time', 'class_id', 'length_bits')


class TraceError(ValueError):
    """A trace breaks the packet model or cannot be read."""


def common_scale(values: Iterable[Fraction]) -> int:
    """Smallest positive integer that makes every value an integer."""
    return lcm(*{value.denominator for value in values})


def to_ticks(values: Iterable[Fraction], scale: int) -> List[int]:
    """values * scale as ints; scale must be a multiple of every denominator."""
    factors: Dict[int, int] = {}
    ticks: List[int] = []
    for value in values:
        factor = factors.get(value.denominator)
        if factor is None:
            factor = factors[value.denominator] = scale // value.denominator
        ticks.append(value.numerator * factor)
    return ticks


@dataclass(frozen=True)
class Packet:
    """
    One packet of the aggregate flow.

    order is the global FIFO position j (1-based); seq is the index i
    within its class.
    """

    order: int
    class_id: int
    seq: int
    arrival: Fraction
    length: Fraction


@dataclass(frozen=True)
class Trace:
    config: SystemConfig
    packets: Tuple[Packet, ...]

    def __len__(self) -> int:
        return len(self.packets)

    def for_class(self, class_id: int) -> Tuple[Packet, ...]:
        return tuple(p for p in self.packets if p.class_id == class_id)


@dataclass(frozen=True)
class StepFunction:
    """
    Right-continuous step function, 0 before the first step.

    Held on integers: step i starts at ticks[i] / time_scale seconds and
    holds units[i] / bit_scale bits until the next step.
    """

    ticks: Tuple[int, ...] = ()
    units: Tuple[int, ...] = ()
    time_scale: int = 1
    bit_scale: int = 1

    @cached_property
    def times(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(t, self.time_scale) for t in self.ticks)

    @cached_property
    def values(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(v, self.bit_scale) for v in self.units)

    def _value(self, idx: int) -> Fraction:
        return Fraction(self.units[idx], self.bit_scale) if idx >= 0 else Fraction(0)

    def value_at(self, t: object) -> Fraction:
        tick = floor(as_fraction(t) * self.time_scale)
        return self._value(bisect_right(self.ticks, tick) - 1)

    def value_before(self, t: object) -> Fraction:
        """Left limit at t."""
        tick = ceil(as_fraction(t) * self.time_scale)
        return self._value(bisect_left(self.ticks, tick) - 1)

    @property
    def peak_index(self) -> Optional[int]:
        """First step holding the supremum, None when empty."""
        if not self.units:
            return None
        return max(range(len(self.units)), key=self.units.__getitem__)

    @property
    def supremum(self) -> Fraction:
        idx = self.peak_index
        return Fraction(0) if idx is None else self._value(idx)

    def rescaled(self, time_scale: int, bit_scale: int) -> 'StepFunction':
        """The same function on scales that are multiples of the current ones."""
        if (time_scale, bit_scale) == (self.time_scale, self.bit_scale):
            return self
        stretch = time_scale // self.time_scale
        widen = bit_scale // self.bit_scale
        return StepFunction(
            tuple(t * stretch for t in self.ticks),
            tuple(v * widen for v in self.units),
            time_scale,
            bit_scale,
        )

    def to_frame(self, value_name: str = 'bits') -> pd.DataFrame:
        return pd.DataFrame({
            'time': [str(t) for t in self.times],
            value_name: [str(v) for v in self.values],
            'time_seconds': [float(t) for t in self.times],
            f'{value_name}_decimal': [float(v) for v in self.values],
        })


def _accumulate(
    changes: Iterable[Tuple[int, int]],
    time_scale: int,
    bit_scale: int
) -> StepFunction:
    """Sum simultaneous (tick, units) changes and build the running total."""
    deltas: Dict[int, int] = {}
    for tick, delta in changes:
        deltas[tick] = deltas.get(tick, 0) + delta
    ticks = sorted(deltas)
    units = accumulate(deltas[tick] for tick in ticks)
    return StepFunction(tuple(ticks), tuple(units), time_scale, bit_scale)


@dataclass(frozen=True)
class Timeline:
    """
    A schedule on integers.

    Event times are ticks / time_scale seconds and lengths are
    units / bit_scale bits, with the smallest scales that keep every
    arrival, departure and length exact. Index i is the packet at global
    position i + 1. Member lists and step functions are built once and
    shared by every caller.
    """

    time_scale: int
    bit_scale: int
    classes: Tuple[int, ...]
    arrivals: Tuple[int, ...]
    departures: Tuple[int, ...]
    lengths: Tuple[int, ...]
    _cache: Dict[Tuple[str, Optional[int]], object] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    @classmethod
    def of(cls, schedule: 'Schedule') -> 'Timeline':
        packets = schedule.trace.packets
        arrivals = [p.arrival for p in packets]
        lengths = [p.length for p in packets]
        time_scale = common_scale(chain(arrivals, schedule.departures))
        bit_scale = common_scale(lengths)
        return cls(
            time_scale,
            bit_scale,
            tuple(p.class_id for p in packets),
            tuple(to_ticks(arrivals, time_scale)),
            tuple(to_ticks(schedule.departures, time_scale)),
            tuple(to_ticks(lengths, bit_scale)),
        )

    def _cached(self, key: Tuple[str, Optional[int]], build: Callable[[], object]):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def members(self, class_id: Optional[int] = None) -> Tuple[int, ...]:
        """Indices of the packets of class_id (all packets for None)."""
        if class_id is None:
            return tuple(range(len(self.classes)))
        return self._cached(('members', class_id), lambda: tuple(
            i for i, n in enumerate(self.classes) if n == class_id
        ))

    def arrival_steps(self, class_id: Optional[int] = None) -> StepFunction:
        return self._cached(('arrivals', class_id), lambda: _accumulate(
            ((self.arrivals[i], self.lengths[i]) for i in self.members(class_id)),
            self.time_scale, self.bit_scale
        ))

    def departure_steps(self, class_id: Optional[int] = None) -> StepFunction:
        return self._cached(('departures', class_id), lambda: _accumulate(
            ((self.departures[i], self.lengths[i]) for i in self.members(class_id)),
            self.time_scale, self.bit_scale
        ))

    def backlog(self, class_id: Optional[int] = None) -> StepFunction:
        def build() -> StepFunction:
            changes: List[Tuple[int, int]] = []
            for i in self.members(class_id):
                changes.append((self.arrivals[i], self.lengths[i]))
                changes.append((self.departures[i], -self.lengths[i]))
            return _accumulate(changes, self.time_scale, self.bit_scale)
        return self._cached(('backlog', class_id), build)


@dataclass(frozen=True)
class Schedule:
    """Departure time of every packet of trace, in global order."""

    trace: Trace
    departures: Tuple[Fraction, ...]

    @cached_property
    def timeline(self) -> Timeline:
        return Timeline.of(self)

    @cached_property
    def delays(self) -> Tuple[Fraction, ...]:
        return tuple(
            d - p.arrival for p, d in zip(self.trace.packets, self.departures)
        )

    @property
    def max_delay(self) -> Fraction:
        line = self.timeline
        longest = max(
            (d - a for a, d in zip(line.arrivals, line.departures)), default=0
        )
        return Fraction(longest, line.time_scale)

    def for_class(self, class_id: int) -> Tuple[Fraction, ...]:
        return tuple(
            d for p, d in zip(self.trace.packets, self.departures)
            if p.class_id == class_id
        )


def make_trace(
    config: SystemConfig,
    records: Iterable[Tuple[object, int, object]]
) -> Trace:
    """
    Build a trace from (arrival, class_id, length) records in FIFO order.

    Args:
        config: System the packets belong to.
        records: Records in global order; ties at equal arrival times are
            served in this order.

    Raises:
        TraceError: On unknown classes, bad lengths or decreasing arrivals.
    """
    known = {spec.class_id: spec for spec in config.classes}
    counters: Dict[int, int] = {class_id: 0 for class_id in known}
    packets: List[Packet] = []
    previous = Fraction(0)

    for order, (arrival, class_id, length) in enumerate(records, start=1):
        arrival, length = as_fraction(arrival), as_fraction(length)
        class_id = int(class_id)
        if class_id not in known:
            raise TraceError(f"packet {order}: unknown class {class_id}")
        if arrival < previous:
            raise TraceError(
                f"packet {order}: arrival {arrival} precedes previous "
                f"arrival {previous}"
            )
        if not 0 < length <= known[class_id].max_packet:
            raise TraceError(
                f"packet {order}: length {length} outside "
                f"(0, {known[class_id].max_packet}]"
            )
        counters[class_id] += 1
        packets.append(Packet(order, class_id, counters[class_id], arrival, length))
        previous = arrival

    return Trace(config, tuple(packets))


def simulate(trace: Trace) -> Schedule:
    """
    Serve the trace FIFO, each packet at its class rate.

    d_j = max(a_j, d_{j-1}) + l_j / C_n with d_0 = 0, run on integer
    ticks of a scale that holds every arrival and service time exactly.
    """
    capacity = {spec.class_id: spec.capacity for spec in trace.config.classes}
    service: Dict[Tuple[int, int, int], Fraction] = {}
    for packet in trace.packets:
        key = (packet.class_id, packet.length.numerator, packet.length.denominator)
        if key not in service:
            service[key] = packet.length / capacity[packet.class_id]

    arrivals = [p.arrival for p in trace.packets]
    scale = common_scale(chain(arrivals, service.values()))
    work = dict(zip(service, to_ticks(service.values(), scale)))

    departures: List[Fraction] = []
    finish = 0
    for packet, tick in zip(trace.packets, to_ticks(arrivals, scale)):
        finish = max(tick, finish) + work[
            packet.class_id, packet.length.numerator, packet.length.denominator
        ]
        departures.append(Fraction(finish, scale))
    return Schedule(trace, tuple(departures))


def cumulative_arrivals(trace: Trace, class_id: Optional[int] = None) -> StepFunction:
    """A(t) (or A_n(t)): bits with arrival time <= t."""
    packets = [
        p for p in trace.packets if class_id is None or p.class_id == class_id
    ]
    arrivals = [p.arrival for p in packets]
    lengths = [p.length for p in packets]
    time_scale, bit_scale = common_scale(arrivals), common_scale(lengths)
    return _accumulate(
        zip(to_ticks(arrivals, time_scale), to_ticks(lengths, bit_scale)),
        time_scale, bit_scale
    )


def cumulative_departures(
    schedule: Schedule,
    class_id: Optional[int] = None
) -> StepFunction:
    """A*(t) (or A*_n(t)): bits with departure time <= t."""
    return schedule.timeline.departure_steps(class_id)


def _timeline(trace: Trace, schedule: Schedule) -> Timeline:
    if trace is not schedule.trace:
        schedule = Schedule(trace, schedule.departures)
    return schedule.timeline


def backlog_process(trace: Trace, schedule: Schedule) -> StepFunction:
    """
    B(t) = A(t) - A*(t) at every arrival and departure instant.

    Packets count in full from their arrival instant until their departure
    instant. The supremum is StepFunction.supremum. The process is built
    once per schedule and shared with the checkers.
    """
    return _timeline(trace, schedule).backlog()


def per_class_backlog(trace: Trace, schedule: Schedule, class_id: int) -> StepFunction:
    """B_n(t) = A_n(t) - A*_n(t)."""
    return _timeline(trace, schedule).backlog(class_id)


def normalize(trace: Trace) -> Trace:
    """
    Map the trace onto the equivalent unit-rate reference system.

    Every length l of class n becomes l / C_n (seconds of work) and every
    class is served at rate 1; arrivals and order are unchanged.
    """
    reference = SystemConfig(
        classes=tuple(
            ClassSpec(
                class_id=spec.class_id,
                capacity=Fraction(1),
                rate=spec.rate / spec.capacity,
                burst=spec.burst / spec.capacity,
                max_packet=spec.max_packet / spec.capacity,
            )
            for spec in trace.config.classes
        ),
        name=f"{trace.config.name}-normalized"
    )
    capacity = {spec.class_id: spec.capacity for spec in trace.config.classes}
    return Trace(
        reference,
        tuple(
            Packet(p.order, p.class_id, p.seq, p.arrival,
                   p.length / capacity[p.class_id])
            for p in trace.packets
        )
    )


def trace_frame(trace: Trace) -> pd.DataFrame:
    return pd.DataFrame({
        'arrival_time': [str(p.arrival) for p in trace.packets],
        'class_id': [p.class_id for p in trace.packets],
        'length_bits': [str(p.length) for p in trace.packets],
    }, columns=list(TRACE_COLUMNS))


def write_trace(
    trace: Trace,
    path: Union[str, Path],
    header: Optional[Dict[str, object]] = None
) -> None:
    """
    Write one packet per line, file order = FIFO tie order.

    header entries become '# key: value' provenance lines.
    """
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        for key, value in (header or {}).items():
            handle.write(f"# {key}: {value}\n")
        trace_frame(trace).to_csv(handle, index=False)


def read_trace(path: Union[str, Path], config: SystemConfig) -> Trace:
    """
    Read a trace file written by write_trace (or by hand).

    Arrival times and lengths accept 'p/q' rationals or decimals.

    Raises:
        FileNotFoundError: If the file is missing.
        TraceError: On malformed rows.
    """
    frame = pd.read_csv(path, dtype=str, comment='#', skipinitialspace=True)
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise TraceError(f"trace {path} is missing columns {missing}")

    records: List[Tuple[Fraction, int, Fraction]] = []
    for line, (_, row) in enumerate(frame.iterrows(), start=1):
        try:
            records.append((
                parse_quantity(row['arrival_time']),
                int(str(row['class_id']).strip()),
                parse_quantity(row['length_bits']),
            ))
        except (ValueError, TypeError) as exc:
            raise TraceError(f"trace {path}, packet {line}: {exc}") from exc
    return make_trace(config, records)


def schedule_frame(schedule: Schedule) -> pd.DataFrame:
    frame = trace_frame(schedule.trace)
    frame['departure_time'] = [str(d) for d in schedule.departures]
    frame['delay'] = [str(d) for d in schedule.delays]
    frame['delay_seconds'] = [float(d) for d in schedule.delays]
    return frame


def write_schedule(schedule: Schedule, path: Union[str, Path]) -> None:
    schedule_frame(schedule).to_csv(path, index=False)


def read_schedule(path: Union[str, Path], trace: Trace) -> Schedule:
    """
    Read departure times for trace from a schedule file.

    Raises:
        TraceError: If the file does not line up with trace.
    """
    frame = pd.read_csv(path, dtype=str, comment='#', skipinitialspace=True)
    if 'departure_time' not in frame.columns:
        raise TraceError(f"schedule {path} has no departure_time column")
    if len(frame) != len(trace):
        raise TraceError(
            f"schedule {path} has {len(frame)} rows, trace has {len(trace)}"
        )
    try:
        departures = tuple(parse_quantity(v) for v in frame['departure_time'])
    except ValueError as exc:
        raise TraceError(f"schedule {path}: {exc}") from exc
    return Schedule(trace, departures)


def write_backlog(process: StepFunction, path: Union[str, Path]) -> None:
    """Export (time, bits) pairs for plotting."""
    process.to_frame('bits').to_csv(path, index=False)


def departure_order_is_fifo(schedule: Schedule) -> bool:
    departures: Sequence[Fraction] = schedule.departures
    return all(a < b for a, b in zip(departures, departures[1:]))
