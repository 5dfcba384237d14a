from fractions import Fraction

import pytest

from system_model import (
    ConfigError,
    ConfigValidationError,
    EQUAL_CAPACITY,
    TWO_SPEED,
    find_violations,
    load_config,
    make_config,
    parse_quantity,
    utilization,
    validate,
    write_config,
)

HEADER = "class_id,capacity,rate,burst,max_packet\n"


@pytest.mark.parametrize('text, expected', [
    ('12000', 12000),
    (' 12000 ', 12000),
    ('0.4M', 400000),
    ('100k', 100000),
    ('1.5G', 1500000000),
    ('2/3', Fraction(2, 3)),
    ('1e5', 100000),
    (7, 7),
])
def test_parse_quantity(text, expected):
    assert parse_quantity(text) == expected


@pytest.mark.parametrize('text', ['fast', '', '1/0', '3 Mbps'])
def test_parse_quantity_rejects_garbage(text):
    with pytest.raises(ValueError):
        parse_quantity(text)


def test_two_speed_aggregates(two_speed):
    assert two_speed.n_classes == 2
    assert two_speed.c_min == 10 ** 6
    assert two_speed.c_max == 10 ** 8
    assert two_speed.max_packet == 12000
    assert two_speed.total_rate == 40400000
    assert two_speed.total_burst == 1100000
    assert [s.class_id for s in two_speed.others(1)] == [2]


def test_utilization(two_speed):
    load = utilization(two_speed)
    assert load.rho == Fraction(4, 5)
    assert load.without(1) == Fraction(2, 5)
    assert load.without(2) == Fraction(2, 5)


def test_unknown_class_raises(two_speed):
    with pytest.raises(KeyError):
        two_speed.spec(3)


def test_bundled_files_match_presets(data_dir):
    assert load_config(data_dir / 'two_speed.csv') == TWO_SPEED
    assert load_config(data_dir / 'equal_capacity.csv') == EQUAL_CAPACITY


def test_class_id_column_is_optional(tmp_path):
    path = tmp_path / 'plain.csv'
    path.write_text("capacity,rate,burst,max_packet\n1M,0.3M,100k,12000\n")
    config = load_config(path)
    assert config.class_ids == (1,)
    assert config.name == 'plain'


def test_write_then_load_keeps_exact_values(tmp_path, two_speed):
    odd = make_config([
        {'capacity': Fraction(10, 3), 'rate': Fraction(1, 7), 'burst': 5, 'max_packet': 2},
    ], name='odd')
    write_config(odd, tmp_path / 'odd.csv')
    assert load_config(tmp_path / 'odd.csv') == odd


def test_malformed_field_is_reported_with_row_and_field(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text(HEADER + "1,fast,0.3M,100k,12000\n2,1M,0.3M,lots,12000\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert "row 1, field 'capacity'" in info.value.messages[0]
    assert "row 2, field 'burst'" in info.value.messages[1]


def test_missing_column(tmp_path):
    path = tmp_path / 'short.csv'
    path.write_text("capacity,rate,burst\n1M,0.3M,100k\n")
    with pytest.raises(ConfigError, match="max_packet"):
        load_config(path)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_config('no/such/config.csv')


def test_validate_accepts_presets(two_speed, equal_capacity):
    assert validate(two_speed) is two_speed
    assert find_violations(equal_capacity) == []


def test_burst_must_hold_a_max_packet():
    config = make_config([
        {'capacity': 10, 'rate': 1, 'burst': 50, 'max_packet': 100},
    ])
    with pytest.raises(ConfigValidationError) as info:
        validate(config)
    [violation] = info.value.violations
    assert (violation.class_id, violation.field) == (1, 'burst')


def test_every_violation_is_listed():
    config = make_config([
        {'class_id': 1, 'capacity': 0, 'rate': -1, 'burst': 100, 'max_packet': 100},
        {'class_id': 3, 'capacity': 10, 'rate': 1, 'burst': 100, 'max_packet': 0},
    ])
    fields = {(v.class_id, v.field) for v in find_violations(config)}
    assert fields == {
        (None, 'class_id'), (1, 'capacity'), (1, 'rate'), (3, 'max_packet'),
    }


def test_duplicate_ids_and_empty_system():
    twice = make_config([
        {'class_id': 1, 'capacity': 10, 'rate': 1, 'burst': 100, 'max_packet': 100},
        {'class_id': 1, 'capacity': 10, 'rate': 1, 'burst': 100, 'max_packet': 100},
    ])
    assert [v.field for v in find_violations(twice)] == ['class_id']
    assert [v.field for v in find_violations(make_config([]))] == ['classes']
