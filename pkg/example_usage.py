"""
Example Usage: Multiclass FIFO Bounds
Walks through bounds, worst-case traffic, simulation, verification and a
small seed sweep on the bundled two-speed system
"""

import sys
from fractions import Fraction
from typing import Any, Dict

# Add src to path if running from project root
sys.path.insert(0, 'src')

from bounds import BoundReport, compare
from simulator import Schedule, backlog_process, simulate
from system_model import SystemConfig, load_config, validate
from traffic import greedy_burst, peak_burst, shaped_random
from validation_pipeline import ValidationPipeline
from verify import SuiteResult, run_suite


def main() -> None:
    """
    Main function demonstrating the complete workflow
    """

    print("="*80)
    print("MULTICLASS FIFO BOUNDS")
    print("="*80)
    print("\nLoading system...")

    config: SystemConfig = validate(load_config('data/two_speed.csv'))
    for spec in config.classes:
        print(f"  class {spec.class_id}: C={spec.capacity}, r={spec.rate}, "
              f"sigma={spec.burst}, L={spec.max_packet}")

    # Bounds
    print("\n" + "="*80)
    print("STEP 1: Compute Bounds")
    print("="*80)
    report: BoundReport = compare(config)
    print(f"  rho:            {report.utilization.rho}")
    print(f"  improved delay: {report.improved.delay} s")
    print(f"  direct delay:   {report.direct.delay}")
    for n in config.class_ids:
        print(f"  class {n} GR:     "
              f"improved {report.improved.for_class(n).guarantee}, "
              f"direct {report.direct.for_class(n).guarantee}")

    # Worst case
    print("\n" + "="*80)
    print("STEP 2: Greedy Burst")
    print("="*80)
    trace = greedy_burst(config, tagged=2)
    schedule: Schedule = simulate(trace)
    print(f"  packets:        {len(trace)}")
    print(f"  tagged delay:   {schedule.delays[-1]} s")
    print(f"  equals bound:   {schedule.delays[-1] == report.improved.delay}")
    print(f"  class 2 burst:  {peak_burst(trace, 2)} bits")

    # Verification
    print("\n" + "="*80)
    print("STEP 3: Verify Guarantees")
    print("="*80)
    random_schedule = simulate(shaped_random(config, seed=42, horizon=Fraction(1)))
    for name, candidate in (('greedy', schedule), ('random', random_schedule)):
        result: SuiteResult = run_suite(candidate, report)
        peak = backlog_process(candidate.trace, candidate).supremum
        print(f"  {name:8s}: passed={result.passed}, checks={len(result.checks_run)}, "
              f"peak backlog={peak} bits")

    # Sweep
    print("\n" + "="*80)
    print("STEP 4: Seed Sweep")
    print("="*80)
    pipeline = ValidationPipeline(config)
    pipeline.run_sweep(range(10), horizon=Fraction(1))
    quality: Dict[str, Any] = pipeline.generate_quality_report()
    print(f"\n  Pass rate:          {quality['pass_rate']:.1f}%")
    print(f"  Delay bound usage:  {quality['delay_bound_usage']:.1f}%")
    pipeline.export_for_review(output_dir='output')

    print("\n" + "="*80)
    print("DONE")
    print("="*80)


if __name__ == "__main__":
    main()
