#!/usr/bin/env python3
"""
Multiclass FIFO Bounds - Run Script

Computes delay/backlog/service bounds for a multiclass FIFO system and
checks them against simulated traffic.

Usage:
    python run.py bounds --config data/two_speed.csv
    python run.py generate --config two_speed --mode greedy --out greedy.csv
    python run.py simulate --config two_speed --trace greedy.csv --out schedule.csv
    python run.py verify --config two_speed --trace greedy.csv
    python run.py sweep --config two_speed --seeds 100 --workers 4 --out output
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from cli import main


if __name__ == "__main__":
    sys.exit(main())
