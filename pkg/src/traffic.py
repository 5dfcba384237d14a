"""
Traffic Generators
Greedy worst-case bursts, seeded token-bucket-shaped random traffic and the
leaky-bucket conformance checker
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import chain
from math import floor, lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from curve_algebra import InvalidParameterError, as_fraction
from simulator import Packet, Trace, common_scale, make_trace, to_ticks
from system_model import ClassSpec, SystemConfig

# Random arrival times live on this grid (1 microsecond).
TICKS_PER_SECOND = 10 ** 6
TIME_QUANTUM = Fraction(1, TICKS_PER_SECOND)

_CHUNK = 4096


@dataclass(frozen=True)
class ConformanceViolation:
    """Bits arrived in [start, end] of class_id exceed r (end - start) + sigma."""

    class_id: int
    start: Fraction
    end: Fraction
    bits: Fraction
    allowed: Fraction

    @property
    def excess(self) -> Fraction:
        return self.bits - self.allowed


def _burst_lengths(spec: ClassSpec) -> List[Fraction]:
    full = spec.burst // spec.max_packet
    lengths = [spec.max_packet] * int(full)
    remainder = spec.burst - full * spec.max_packet
    if remainder > 0:
        lengths.append(remainder)
    return lengths


def greedy_burst(
    config: SystemConfig,
    tagged: int,
    shuffle_seed: Optional[int] = None
) -> Trace:
    """
    Every class emits its whole burst sigma_n at t = 0.

    Bursts are cut into max-size packets plus one remainder packet. The
    last packet of the tagged class is placed after everything else, so it
    is served last and sees the worst-case delay.

    Args:
        config: Validated system config.
        tagged: Class whose last packet goes last.
        shuffle_seed: If given, the order of all other packets is a seeded
            random permutation instead of class order.

    Raises:
        InvalidParameterError: If tagged is not a class of config.
    """
    if tagged not in config.class_ids:
        raise InvalidParameterError(
            f"tagged class {tagged} not in {list(config.class_ids)}"
        )

    head: List[Tuple[int, Fraction]] = []
    last: Optional[Tuple[int, Fraction]] = None
    for spec in config.classes:
        lengths = _burst_lengths(spec)
        if spec.class_id == tagged:
            last = (spec.class_id, lengths.pop())
        head.extend((spec.class_id, length) for length in lengths)

    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        head = [head[i] for i in rng.permutation(len(head))]

    records = [(Fraction(0), class_id, length) for class_id, length in head]
    records.append((Fraction(0), last[0], last[1]))
    return make_trace(config, records)


def _candidates(
    spec: ClassSpec,
    rng: np.random.Generator,
    last_tick: int,
    intensity: Fraction
) -> Tuple[List[int], List[object]]:
    """
    Unshaped stream with mean rate intensity * r_n.

    Returns arrival ticks (multiples of TIME_QUANTUM, at most last_tick)
    and the matching lengths.
    """
    largest = int(spec.max_packet)
    if largest >= 1:
        mean_length = (1 + largest) / 2
    else:
        mean_length = float(spec.max_packet)
    mean_gap = mean_length / float(intensity * spec.rate)

    ticks: List[int] = []
    lengths: List[object] = []
    clock = 0.0
    while True:
        gaps = rng.exponential(mean_gap, size=_CHUNK)
        if largest >= 1:
            sizes = rng.integers(1, largest, size=_CHUNK, endpoint=True).tolist()
        else:
            sizes = [spec.max_packet] * _CHUNK
        times = clock + np.cumsum(gaps)
        grid = np.rint(times * TICKS_PER_SECOND)
        inside = int(np.searchsorted(grid, last_tick, side='right'))
        ticks.extend(int(tick) for tick in grid[:inside])
        lengths.extend(sizes[:inside])
        if inside < _CHUNK:
            return ticks, lengths
        clock = float(times[-1])


def _gate(spec: ClassSpec, ticks: Sequence[int], lengths: Sequence[object]) -> List[int]:
    """
    Pass a stream through a full (sigma_n, r_n) token bucket on the tick grid.

    A packet that finds too few tokens waits for the first tick at which
    enough have accumulated; packets leave the gate in their original
    order. Tokens are counted in 1 / scale bits so every step is integer.
    """
    per_tick = spec.rate * TIME_QUANTUM
    scale = lcm(per_tick.denominator, spec.burst.denominator,
                spec.max_packet.denominator)
    rate, burst = int(per_tick * scale), int(spec.burst * scale)

    tokens, clock = burst, 0
    released: List[int] = []
    for tick, length in zip(ticks, lengths):
        need = int(length * scale)
        now = max(tick, clock)
        tokens = min(burst, tokens + rate * (now - clock))
        if tokens < need:
            wait = -((tokens - need) // rate)
            now += wait
            tokens = min(burst, tokens + rate * wait)
        tokens -= need
        clock = now
        released.append(now)
    return released


def shaped_random(
    config: SystemConfig,
    seed: int,
    horizon: object,
    intensity: object = Fraction(9, 10)
) -> Trace:
    """
    Seeded random traffic, leaky-bucket conformant by construction.

    Each class draws exponential inter-arrival gaps (rounded to 1 us) and
    integer lengths uniform in [1, L_n] so that the mean offered rate is
    intensity * r_n, then passes the stream through its token bucket,
    which releases on the same 1 us grid. Packets the gate pushes past the
    horizon are dropped. Classes with rate 0, and intensity 0, produce no
    packets.

    Args:
        config: Validated system config.
        seed: Seed for numpy's default generator.
        horizon: Last admissible arrival time in seconds (> 0).
        intensity: Offered load as a fraction of r_n, in [0, 1].

    Returns:
        Trace ordered by arrival time, ties broken by class id.

    Raises:
        InvalidParameterError: On a non-positive horizon or an intensity
            outside [0, 1].
    """
    horizon, intensity = as_fraction(horizon), as_fraction(intensity)
    if horizon <= 0:
        raise InvalidParameterError(f"horizon must be > 0, got {horizon}")
    if not 0 <= intensity <= 1:
        raise InvalidParameterError(
            f"intensity must be in [0, 1], got {intensity}"
        )

    last_tick = floor(horizon * TICKS_PER_SECOND)
    rng = np.random.default_rng(seed)
    records: List[Tuple[int, int, object]] = []
    for spec in config.classes:
        if intensity == 0 or spec.rate == 0:
            continue
        ticks, lengths = _candidates(spec, rng, last_tick, intensity)
        for tick, length in zip(_gate(spec, ticks, lengths), lengths):
            if tick > last_tick:
                break
            records.append((tick, spec.class_id, length))

    records.sort(key=lambda record: (record[0], record[1]))
    return make_trace(config, (
        (Fraction(tick, TICKS_PER_SECOND), class_id, length)
        for tick, class_id, length in records
    ))


@dataclass(frozen=True)
class _Windows:
    """
    Worst windows of one class on integers.

    windows holds (start, end, bits) for the worst window ending at each
    arrival instant: start and end in ticks of 1 / time_scale seconds,
    bits in units of 1 / bit_scale. rate and burst are r_n and sigma_n in
    the same units.
    """

    time_scale: int
    bit_scale: int
    rate: int
    burst: int
    windows: List[Tuple[int, int, int]]

    def excess(self, start: int, end: int, bits: int) -> int:
        return bits - self.rate * (end - start)


def _class_windows(spec: ClassSpec, packets: Sequence[Packet]) -> _Windows:
    """
    Worst window ending at each arrival instant of one class.

    A_n is a step function, so the worst window of every length starts and
    ends at arrival instants; the start minimizing A_n(s-) - r s is kept
    as a running minimum.
    """
    arrivals = [p.arrival for p in packets]
    lengths = [p.length for p in packets]
    time_scale = common_scale(arrivals)
    bit_scale = common_scale(chain([spec.burst], lengths))
    per_tick = spec.rate * bit_scale / time_scale
    bit_scale *= per_tick.denominator
    rate = per_tick.numerator
    ticks = to_ticks(arrivals, time_scale)
    units = to_ticks(lengths, bit_scale)

    windows: List[Tuple[int, int, int]] = []
    before = 0
    best_key: Optional[int] = None
    best_start = best_before = 0
    i = 0
    while i < len(ticks):
        tick = ticks[i]
        key = before - rate * tick
        if best_key is None or key < best_key:
            best_start, best_key, best_before = tick, key, before
        while i < len(ticks) and ticks[i] == tick:
            before += units[i]
            i += 1
        windows.append((best_start, tick, before - best_before))
    return _Windows(time_scale, bit_scale, rate, int(spec.burst * bit_scale), windows)


def peak_burst(trace: Trace, class_id: int) -> Fraction:
    """sup over windows [s, t] of A_n(s, t) - r_n (t - s); 0 without packets."""
    spec = trace.config.spec(class_id)
    found = _class_windows(spec, trace.for_class(class_id))
    peak = max((found.excess(*window) for window in found.windows), default=0)
    return Fraction(peak, found.bit_scale)


def conformance_check(trace: Trace) -> Optional[ConformanceViolation]:
    """
    Check every class against its (r_n, sigma_n) leaky bucket, exactly.

    Returns:
        None when the trace conforms, otherwise the violation whose window
        ends first (lowest class id on ties).
    """
    first: Dict[int, ConformanceViolation] = {}
    for spec in trace.config.classes:
        found = _class_windows(spec, trace.for_class(spec.class_id))
        for start, end, bits in found.windows:
            allowed = found.rate * (end - start) + found.burst
            if bits > allowed:
                first[spec.class_id] = ConformanceViolation(
                    spec.class_id,
                    Fraction(start, found.time_scale),
                    Fraction(end, found.time_scale),
                    Fraction(bits, found.bit_scale),
                    Fraction(allowed, found.bit_scale),
                )
                break

    if not first:
        return None
    return min(first.values(), key=lambda v: (v.end, v.class_id))
