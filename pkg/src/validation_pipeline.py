"""
Validation sweeps:
- Seeded random traces simulated and verified with progress tracking
- Sweep quality metrics
- Export functions for review
"""

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd
from tqdm import tqdm

from bounds import BacklogBound, BoundReport, Method, NotApplicable, compare
from reporting import convert_to_native, decimal, exact
from simulator import simulate
from system_model import SystemConfig
from traffic import shaped_random
from verify import run_suite

SWEEP_COLUMNS: List[str] = [
    'seed', 'packets', 'max_delay', 'max_delay_seconds', 'peak_backlog',
    'peak_backlog_bits', 'violations', 'passed', 'violated_checks',
    'checks_run', 'tightest_check', 'tightest_margin',
    'tightest_margin_decimal',
]


def verify_seed(
    config: SystemConfig,
    seed: int,
    horizon: Fraction,
    intensity: Fraction,
    which: str = 'all'
) -> Dict[str, Any]:
    """
    Generate, simulate and verify one seed.

    Module-level so process pools can pickle it.

    Returns:
        One result row for the sweep table.
    """
    report = compare(config)
    trace = shaped_random(config, seed, horizon, intensity)
    schedule = simulate(trace)
    result = run_suite(schedule, report, which)

    tightest = min(result.tightest.values(), key=lambda o: o.margin, default=None)
    # same process the backlog checks read
    peak = schedule.timeline.backlog().supremum
    return {
        'seed': seed,
        'packets': len(trace),
        'max_delay': exact(schedule.max_delay),
        'max_delay_seconds': decimal(schedule.max_delay),
        'peak_backlog': exact(peak),
        'peak_backlog_bits': decimal(peak),
        'violations': len(result.violations),
        'passed': result.passed,
        'violated_checks': ';'.join(sorted({v.check for v in result.violations})),
        'checks_run': len(result.checks_run),
        'tightest_check': None if tightest is None else tightest.check,
        'tightest_margin': None if tightest is None else exact(tightest.margin),
        'tightest_margin_decimal': None if tightest is None else decimal(tightest.margin),
    }


class ValidationPipeline:
    """Multi-seed verification of one system against its bounds"""

    def __init__(self, config: SystemConfig) -> None:
        self.config: SystemConfig = config
        self.report: BoundReport = compare(config)
        self.results: Optional[pd.DataFrame] = None

    def run_sweep(
        self,
        seeds: Iterable[int],
        horizon: Union[Fraction, str, float] = 10,
        intensity: Union[Fraction, str, float] = Fraction(9, 10),
        workers: int = 1,
        which: str = 'all',
        quiet: bool = False
    ) -> pd.DataFrame:
        """
        Verify shaped_random traces for every seed.

        Args:
            seeds: Seeds to run.
            horizon: Trace horizon in seconds (default: 10).
            intensity: Offered load fraction (default: 0.9).
            workers: Processes to fan out over (default: 1, in-process).
            which: Check selection passed to verify.run_suite.
            quiet: Suppress console output and the progress bar.

        Returns:
            DataFrame with one row per seed, in seed order.
        """
        seeds = list(seeds)
        task = partial(
            verify_seed, self.config,
            horizon=Fraction(str(horizon)), intensity=Fraction(str(intensity)),
            which=which
        )

        if not quiet:
            print(f"Verifying {len(seeds)} seeds on {self.config.name}...")
            print(f"Horizon: {horizon} s, intensity: {intensity}, workers: {workers}")

        rows: List[Dict[str, Any]]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                rows = list(tqdm(executor.map(task, seeds), total=len(seeds), disable=quiet))
        else:
            rows = [task(seed) for seed in tqdm(seeds, disable=quiet)]

        self.results = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
        return self.results

    def generate_quality_report(self) -> Dict[str, Any]:
        """Summarize the sweep: pass rate and how close runs came to the bounds"""
        if self.results is None:
            raise ValueError("Must run sweep first")

        results = self.results
        passed = results['passed'].astype(bool)
        report: Dict[str, Any] = {
            'system': self.config.name,
            'total_runs': len(results),
            'passed_runs': int(passed.sum()),
            'failed_runs': int((~passed).sum()),
            'pass_rate': passed.mean() * 100 if len(results) else 100.0,
            'total_violations': results['violations'].sum(),
            'total_packets': results['packets'].sum(),
            'max_delay_seconds': results['max_delay_seconds'].max(),
            'peak_backlog_bits': results['peak_backlog_bits'].max(),
        }

        improved = self.report.bounds(Method.IMPROVED)
        if not isinstance(improved.delay, NotApplicable) and improved.delay > 0:
            report['delay_bound_seconds'] = float(improved.delay)
            report['delay_bound_usage'] = (
                results['max_delay_seconds'].max() / float(improved.delay) * 100
            )
        if isinstance(improved.backlog, BacklogBound) and improved.backlog.value > 0:
            report['backlog_bound_bits'] = float(improved.backlog.value)
            report['backlog_bound_usage'] = (
                results['peak_backlog_bits'].max() / float(improved.backlog.value) * 100
            )

        failing = results[~passed]
        if len(failing) > 0:
            checks = failing['violated_checks'].str.split(';').explode()
            report['violated_check_distribution'] = checks.value_counts().to_dict()

        report['tightest_check_distribution'] = (
            results['tightest_check'].value_counts().head(10).to_dict()
        )
        return convert_to_native(report)

    def export_for_review(
        self,
        output_dir: Union[str, Path] = 'output',
        top: int = 10,
        quiet: bool = False
    ) -> None:
        """Export sweep results to CSV files for review"""
        if self.results is None:
            raise ValueError("Must run sweep first")

        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        # 1. Every run
        self.results.to_csv(output_dir / 'all_runs.csv', index=False)

        # 2. Runs with at least one violation
        violating: pd.DataFrame = self.results[~self.results['passed'].astype(bool)].copy()
        violating.to_csv(output_dir / 'violating_runs.csv', index=False)

        # 3. Runs closest to a bound
        tightest: pd.DataFrame = (
            self.results.dropna(subset=['tightest_margin_decimal'])
            .sort_values(['tightest_margin_decimal', 'seed'])
            .head(top)
        )
        tightest.to_csv(output_dir / 'tightest_runs.csv', index=False)

        if quiet:
            return
        print(f"\nExported files to {output_dir}:")
        print(f"  - all_runs.csv ({len(self.results)} records)")
        print(f"  - violating_runs.csv ({len(violating)} records)")
        print(f"  - tightest_runs.csv ({len(tightest)} records)")
