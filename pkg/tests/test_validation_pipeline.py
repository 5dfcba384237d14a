import os
import time
from fractions import Fraction

import pandas as pd
import pytest

from reporting import exact
from simulator import Schedule, backlog_process, simulate
from traffic import shaped_random
from validation_pipeline import SWEEP_COLUMNS, ValidationPipeline, verify_seed

HORIZON = Fraction(1, 50)


@pytest.fixture
def swept(two_speed):
    pipeline = ValidationPipeline(two_speed)
    pipeline.run_sweep(range(4), horizon=HORIZON, quiet=True)
    return pipeline


def test_verify_seed_row(two_speed):
    row = verify_seed(two_speed, 7, HORIZON, Fraction(9, 10))
    assert list(row) == SWEEP_COLUMNS
    assert row['seed'] == 7
    assert row['passed'] is True
    assert row['violations'] == 0
    assert row['violated_checks'] == ''
    assert Fraction(row['max_delay']) <= Fraction(11, 100)


def test_peak_backlog_matches_a_fresh_process(two_speed):
    row = verify_seed(two_speed, 3, HORIZON, Fraction(9, 10))
    schedule = simulate(shaped_random(two_speed, 3, HORIZON, Fraction(9, 10)))
    rebuilt = Schedule(schedule.trace, schedule.departures)
    assert row['peak_backlog'] == exact(backlog_process(rebuilt.trace, rebuilt).supremum)
    assert row['max_delay'] == exact(max(rebuilt.delays))


def test_sweep_table(swept):
    results = swept.results
    assert list(results.columns) == SWEEP_COLUMNS
    assert list(results['seed']) == [0, 1, 2, 3]
    assert results['passed'].all()
    assert (results['packets'] > 0).all()


def test_quality_report(swept):
    report = swept.generate_quality_report()
    assert report['total_runs'] == 4
    assert report['passed_runs'] == 4
    assert report['failed_runs'] == 0
    assert report['pass_rate'] == 100.0
    assert report['delay_bound_seconds'] == pytest.approx(0.11)
    assert 0 < report['delay_bound_usage'] <= 100
    assert 0 < report['backlog_bound_usage'] <= 100
    assert 'violated_check_distribution' not in report
    assert sum(report['tightest_check_distribution'].values()) == 4


def test_report_needs_a_sweep(two_speed):
    pipeline = ValidationPipeline(two_speed)
    with pytest.raises(ValueError, match='Must run sweep first'):
        pipeline.generate_quality_report()
    with pytest.raises(ValueError, match='Must run sweep first'):
        pipeline.export_for_review()


def test_export_for_review(swept, tmp_path):
    swept.export_for_review(tmp_path, top=2, quiet=True)
    assert len(pd.read_csv(tmp_path / 'all_runs.csv')) == 4
    assert len(pd.read_csv(tmp_path / 'violating_runs.csv')) == 0
    tightest = pd.read_csv(tmp_path / 'tightest_runs.csv')
    assert len(tightest) == 2
    assert tightest['tightest_margin_decimal'].is_monotonic_increasing


def test_selection_is_passed_through(two_speed):
    pipeline = ValidationPipeline(two_speed)
    results = pipeline.run_sweep([0], horizon=HORIZON, which='delay', quiet=True)
    assert results.loc[0, 'tightest_check'].endswith('(improved)')
    assert 'delay' in results.loc[0, 'tightest_check']


def test_workers_do_not_change_results(two_speed):
    serial = ValidationPipeline(two_speed).run_sweep(range(3), horizon=HORIZON, quiet=True)
    parallel = ValidationPipeline(two_speed).run_sweep(
        range(3), horizon=HORIZON, workers=2, quiet=True
    )
    pd.testing.assert_frame_equal(serial, parallel)


@pytest.mark.slow
def test_full_sweep_has_no_violations(two_speed):
    pipeline = ValidationPipeline(two_speed)
    started = time.perf_counter()
    results = pipeline.run_sweep(
        range(100), horizon=10, workers=os.cpu_count() or 1, quiet=True
    )
    elapsed = time.perf_counter() - started
    assert results['passed'].all()
    assert pipeline.generate_quality_report()['total_violations'] == 0
    assert elapsed < 60
