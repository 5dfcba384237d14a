"""
Multiclass FIFO System Model
Traffic classes, derived aggregates, utilization and config file parsing
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

from curve_algebra import as_fraction

UNIT_MULTIPLIERS: Dict[str, int] = {
    '': 1,
    'k': 10 ** 3,
    'K': 10 ** 3,
    'M': 10 ** 6,
    'G': 10 ** 9,
}

CONFIG_FIELDS: Tuple[str, ...] = ('capacity', 'rate', 'burst', 'max_packet')

_QUANTITY_PATTERN = re.compile(r'^\s*([0-9.eE+\-/]+)\s*([kKMG]?)\s*$')


class ConfigError(ValueError):
    """A config file could not be parsed."""

    def __init__(self, messages: List[str]) -> None:
        self.messages = messages
        super().__init__('; '.join(messages))


@dataclass(frozen=True)
class ConfigViolation:
    class_id: Optional[int]
    field: str
    message: str

    def __str__(self) -> str:
        where = 'system' if self.class_id is None else f'class {self.class_id}'
        return f"{where}, {self.field}: {self.message}"


class ConfigValidationError(ValueError):
    """A parsed config breaks one or more model invariants."""

    def __init__(self, violations: List[ConfigViolation]) -> None:
        self.violations = violations
        super().__init__('; '.join(str(v) for v in violations))


@dataclass(frozen=True)
class ClassSpec:
    """One traffic class: capacity C_n, rate r_n, burst sigma_n, max packet L_n."""

    class_id: int
    capacity: Fraction
    rate: Fraction
    burst: Fraction
    max_packet: Fraction


@dataclass(frozen=True)
class SystemConfig:
    """The N traffic classes sharing one FIFO queue."""

    classes: Tuple[ClassSpec, ...]
    name: str = 'system'

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_ids(self) -> Tuple[int, ...]:
        return tuple(spec.class_id for spec in self.classes)

    @property
    def c_min(self) -> Fraction:
        return min(spec.capacity for spec in self.classes)

    @property
    def c_max(self) -> Fraction:
        return max(spec.capacity for spec in self.classes)

    @property
    def max_packet(self) -> Fraction:
        """L = max_n L_n."""
        return max(spec.max_packet for spec in self.classes)

    @property
    def total_rate(self) -> Fraction:
        return sum((spec.rate for spec in self.classes), Fraction(0))

    @property
    def total_burst(self) -> Fraction:
        return sum((spec.burst for spec in self.classes), Fraction(0))

    def spec(self, class_id: int) -> ClassSpec:
        for spec in self.classes:
            if spec.class_id == class_id:
                return spec
        raise KeyError(f"no traffic class {class_id} in {self.name}")

    def others(self, class_id: int) -> Tuple[ClassSpec, ...]:
        """All classes except class_id."""
        self.spec(class_id)
        return tuple(s for s in self.classes if s.class_id != class_id)


@dataclass(frozen=True)
class Utilization:
    """rho = sum r_n / C_n and, per class, rho_bar(n) over the other classes."""

    rho: Fraction
    rho_bar: Dict[int, Fraction]

    def without(self, class_id: int) -> Fraction:
        return self.rho_bar[class_id]


def parse_quantity(text: Any) -> Fraction:
    """
    Parse an exact quantity such as '12000', '2/3', '0.4M' or '1e5'.

    Args:
        text: String (or number) with an optional k/M/G multiplier suffix.

    Returns:
        Exact Fraction value.

    Raises:
        ValueError: If the text is not a number.
    """
    if not isinstance(text, str):
        return as_fraction(text)
    match = _QUANTITY_PATTERN.match(text)
    if not match:
        raise ValueError(f"cannot parse quantity {text!r}")
    number, suffix = match.groups()
    try:
        value = Fraction(number.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse quantity {text!r}") from exc
    return value * UNIT_MULTIPLIERS[suffix]


def find_violations(config: SystemConfig) -> List[ConfigViolation]:
    """
    List every invariant the config breaks.

    Args:
        config: Parsed system config.

    Returns:
        Violations with class id and field; empty when valid.
    """
    violations: List[ConfigViolation] = []

    if config.n_classes == 0:
        violations.append(
            ConfigViolation(None, 'classes', 'at least one class is required')
        )
        return violations

    ids = sorted(config.class_ids)
    if len(set(ids)) != len(ids):
        violations.append(
            ConfigViolation(None, 'class_id', f'duplicate class ids {ids}')
        )
    elif ids != list(range(1, len(ids) + 1)):
        violations.append(
            ConfigViolation(
                None, 'class_id', f'class ids must be 1..N, got {ids}'
            )
        )

    for spec in config.classes:
        if spec.capacity <= 0:
            violations.append(ConfigViolation(
                spec.class_id, 'capacity',
                f'capacity must be > 0, got {spec.capacity}'
            ))
        if spec.rate < 0:
            violations.append(ConfigViolation(
                spec.class_id, 'rate', f'rate must be >= 0, got {spec.rate}'
            ))
        if spec.max_packet <= 0:
            violations.append(ConfigViolation(
                spec.class_id, 'max_packet',
                f'max_packet must be > 0, got {spec.max_packet}'
            ))
        if spec.burst < spec.max_packet:
            violations.append(ConfigViolation(
                spec.class_id, 'burst',
                f'burst {spec.burst} must admit one max_packet '
                f'({spec.max_packet})'
            ))

    return violations


def validate(config: SystemConfig) -> SystemConfig:
    """
    Return config unchanged when valid.

    Raises:
        ConfigValidationError: With every violated invariant.
    """
    violations = find_violations(config)
    if violations:
        raise ConfigValidationError(violations)
    return config


def utilization(config: SystemConfig) -> Utilization:
    """Exact rho and rho_bar(n) for every class."""
    loads = {spec.class_id: spec.rate / spec.capacity for spec in config.classes}
    rho = sum(loads.values(), Fraction(0))
    rho_bar = {class_id: rho - load for class_id, load in loads.items()}
    return Utilization(rho=rho, rho_bar=rho_bar)


def make_config(
    classes: List[Dict[str, Any]],
    name: str = 'system'
) -> SystemConfig:
    """
    Build a SystemConfig from plain dictionaries.

    Args:
        classes: Dicts with capacity, rate, burst, max_packet and an
            optional class_id (defaults to position, starting at 1).
        name: System name.
    """
    specs = tuple(
        ClassSpec(
            class_id=int(entry.get('class_id', position)),
            capacity=parse_quantity(entry['capacity']),
            rate=parse_quantity(entry['rate']),
            burst=parse_quantity(entry['burst']),
            max_packet=parse_quantity(entry['max_packet']),
        )
        for position, entry in enumerate(classes, start=1)
    )
    return SystemConfig(classes=specs, name=name)


def load_config(path: Union[str, Path]) -> SystemConfig:
    """
    Read a system config CSV.

    Columns: capacity, rate, burst, max_packet and optionally class_id.
    Lines starting with '#' are ignored. The system name is the file stem.

    Raises:
        FileNotFoundError: If the file is missing.
        ConfigError: With one message per unparseable field.
    """
    path = Path(path)
    frame: pd.DataFrame = pd.read_csv(
        path, dtype=str, comment='#', skipinitialspace=True
    )
    frame.columns = [str(c).strip() for c in frame.columns]

    missing = [f for f in CONFIG_FIELDS if f not in frame.columns]
    if missing:
        raise ConfigError([f"missing column '{f}'" for f in missing])

    messages: List[str] = []
    specs: List[ClassSpec] = []
    for position, (_, row) in enumerate(frame.iterrows(), start=1):
        values: Dict[str, Fraction] = {}
        for field in CONFIG_FIELDS:
            raw = row[field]
            if pd.isna(raw):
                messages.append(f"row {position}, field '{field}': empty")
                continue
            try:
                values[field] = parse_quantity(raw)
            except ValueError:
                messages.append(
                    f"row {position}, field '{field}': cannot parse {raw!r}"
                )

        class_id = position
        if 'class_id' in frame.columns and pd.notna(row['class_id']):
            try:
                class_id = int(str(row['class_id']).strip())
            except ValueError:
                messages.append(
                    f"row {position}, field 'class_id': "
                    f"cannot parse {row['class_id']!r}"
                )

        if len(values) == len(CONFIG_FIELDS):
            specs.append(ClassSpec(class_id=class_id, **values))

    if messages:
        raise ConfigError(messages)
    return SystemConfig(classes=tuple(specs), name=path.stem)


def write_config(config: SystemConfig, path: Union[str, Path]) -> None:
    """Write config as CSV with exact 'p/q' values."""
    frame = pd.DataFrame([
        {
            'class_id': spec.class_id,
            'capacity': str(spec.capacity),
            'rate': str(spec.rate),
            'burst': str(spec.burst),
            'max_packet': str(spec.max_packet),
        }
        for spec in config.classes
    ])
    frame.to_csv(path, index=False)


# Two classes at 1 Mbps and 100 Mbps: the direct bounds do not apply.
TWO_SPEED = make_config([
    {'capacity': '1M', 'rate': '0.4M', 'burst': '100k', 'max_packet': 12000},
    {'capacity': '100M', 'rate': '40M', 'burst': '1M', 'max_packet': 12000},
], name='two_speed')

# Two identical classes: both methods give the same delay bound.
EQUAL_CAPACITY = make_config([
    {'capacity': '1M', 'rate': '0.3M', 'burst': '100k', 'max_packet': 12000},
    {'capacity': '1M', 'rate': '0.3M', 'burst': '100k', 'max_packet': 12000},
], name='equal_capacity')

EXAMPLE_SYSTEMS: Dict[str, SystemConfig] = {
    TWO_SPEED.name: TWO_SPEED,
    EQUAL_CAPACITY.name: EQUAL_CAPACITY,
}
