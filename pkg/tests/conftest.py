"""Shared fixtures: src/ on the import path and the example systems."""

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT / 'src'))

from system_model import EQUAL_CAPACITY, TWO_SPEED, make_config  # noqa: E402


@pytest.fixture
def data_dir() -> Path:
    return PROJECT_ROOT / 'data'


@pytest.fixture
def two_speed():
    return TWO_SPEED


@pytest.fixture
def equal_capacity():
    return EQUAL_CAPACITY


@pytest.fixture
def tiny():
    """C = (10, 100), sigma = L = 100 for both classes."""
    return make_config([
        {'capacity': 10, 'rate': 1, 'burst': 100, 'max_packet': 100},
        {'capacity': 100, 'rate': 10, 'burst': 100, 'max_packet': 100},
    ], name='tiny')


@pytest.fixture
def single_class():
    return make_config([
        {'capacity': 100, 'rate': 40, 'burst': 100, 'max_packet': 100},
    ], name='single')
