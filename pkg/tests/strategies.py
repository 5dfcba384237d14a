"""Hypothesis strategies for curves, configs and traces."""

from fractions import Fraction

from hypothesis import strategies as st

from curve_algebra import Curve, impulse, rate_latency
from simulator import make_trace
from system_model import make_config

# Curves keep integer breakpoint times, values and slopes so brute-force
# evaluation on a grid is exact.


def _piecewise(start: int, slopes, gaps) -> Curve:
    points = []
    t, v = 0, start
    for i, slope in enumerate(slopes):
        points.append((t, v, slope))
        if i < len(gaps):
            t += gaps[i]
            v += slope * gaps[i]
    return Curve.build(points)


@st.composite
def concave_curves(draw, max_pieces: int = 3) -> Curve:
    slopes = sorted(
        draw(st.lists(st.integers(0, 4), min_size=1, max_size=max_pieces)),
        reverse=True
    )
    gaps = draw(st.lists(st.integers(1, 5), min_size=len(slopes) - 1,
                         max_size=len(slopes) - 1))
    return _piecewise(draw(st.integers(0, 10)), slopes, gaps)


@st.composite
def convex_curves(draw, max_pieces: int = 3) -> Curve:
    """Convex, starting at 0, unbounded (last slope >= 1)."""
    slopes = sorted(draw(st.lists(st.integers(0, 4), min_size=1, max_size=max_pieces)))
    slopes[-1] = max(slopes[-1], 1)
    gaps = draw(st.lists(st.integers(1, 5), min_size=len(slopes) - 1,
                         max_size=len(slopes) - 1))
    return _piecewise(0, slopes, gaps)


rate_latency_curves = st.builds(rate_latency, st.integers(1, 4), st.integers(0, 6))
impulse_curves = st.builds(impulse, st.integers(0, 6))
service_curves = st.one_of(convex_curves(), rate_latency_curves, impulse_curves)


@st.composite
def configs(draw, min_classes: int = 1, max_classes: int = 4,
            max_load: Fraction = Fraction(1)):
    """Valid configs with rho <= max_load."""
    n = draw(st.integers(min_classes, max_classes))
    classes = []
    for _ in range(n):
        capacity = draw(st.integers(1, 10 ** 4))
        max_packet = draw(st.integers(1, 200))
        load = draw(st.fractions(0, max_load / n, max_denominator=50))
        classes.append({
            'capacity': capacity,
            'rate': load * capacity,
            'burst': max_packet + draw(st.integers(0, 2000)),
            'max_packet': max_packet,
        })
    return make_config(classes, name='generated')


@st.composite
def direct_configs(draw, max_classes: int = 4):
    """Configs where every class gets a direct GR guarantee."""
    n = draw(st.integers(1, max_classes))
    capacities = draw(st.lists(st.integers(1, 10 ** 4), min_size=n, max_size=n))
    share = Fraction(min(capacities), n + 1)
    classes = []
    for capacity in capacities:
        max_packet = draw(st.integers(1, 200))
        classes.append({
            'capacity': capacity,
            'rate': draw(st.fractions(0, share, max_denominator=50)),
            'burst': max_packet + draw(st.integers(0, 2000)),
            'max_packet': max_packet,
        })
    return make_config(classes, name='direct')


@st.composite
def traces(draw, max_packets: int = 25):
    """Arbitrary (not necessarily conformant) trace of a generated config."""
    config = draw(configs())
    count = draw(st.integers(0, max_packets))
    records = []
    clock = Fraction(0)
    for _ in range(count):
        clock += draw(st.fractions(0, 5, max_denominator=8))
        spec = draw(st.sampled_from(config.classes))
        length = draw(st.integers(1, int(spec.max_packet)))
        records.append((clock, spec.class_id, length))
    return make_trace(config, records)
