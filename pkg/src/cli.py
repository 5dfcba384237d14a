"""
Command-line front end: bounds, generate, simulate, verify and sweep.

Every command prints a banner-style summary, or a JSON document with
--json. Exit status is 0 on success, 1 when verification finds violations
and 2 on bad input.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from bounds import BoundReport, Method, compare
from reporting import (
    decimal,
    exact,
    report_table,
    report_to_record,
    suite_record,
    to_json,
    violations_table,
)
from simulator import (
    Schedule,
    Trace,
    backlog_process,
    read_schedule,
    read_trace,
    simulate,
    write_backlog,
    write_schedule,
    write_trace,
)
from system_model import (
    EXAMPLE_SYSTEMS,
    ConfigError,
    ConfigValidationError,
    SystemConfig,
    load_config,
    parse_quantity,
    validate,
)
from traffic import conformance_check, greedy_burst, shaped_random
from validation_pipeline import ValidationPipeline
from verify import SUITE_SELECTIONS, SuiteResult, run_suite

METHOD_CHOICES = ('direct', 'improved', 'both')


def banner(title: str) -> None:
    print("=" * 80)
    print(title)
    print("=" * 80)
    print()


def _fmt(value: Any) -> str:
    """Exact value with its decimal approximation."""
    if value is None:
        return "-"
    text = exact(value)
    if text == "inf" or Fraction(value).denominator == 1:
        return text
    return f"{text} (~{decimal(value):.6g})"


def _load_config(path: str) -> SystemConfig:
    """Config file, or one of the bundled example system names."""
    if not Path(path).exists() and path in EXAMPLE_SYSTEMS:
        return EXAMPLE_SYSTEMS[path]
    return validate(load_config(path))


def _methods(selector: str) -> List[Method]:
    if selector == 'both':
        return list(Method)
    return [Method(selector)]


def print_report(report: BoundReport, methods: Sequence[Method]) -> None:
    banner(f"BOUNDS - {report.system}")
    print(f"Utilization rho: {_fmt(report.utilization.rho)}")
    print(f"Stability: {report.stability}")
    print(f"Aggregate GR: rate {_fmt(report.aggregate_guarantee.rate)}, error 0")
    print(f"Aggregate service curve: {report.aggregate_service_curve}")
    print()

    table = report_table(report, list(methods))
    for _, row in table.iterrows():
        if pd.isna(row['value']):
            value = row['note']
        else:
            value = str(row['value'])
            if pd.notna(row['decimal']):
                value += f" (~{row['decimal']:.6g})"
            if row['note']:
                value += f"  [{row['note']}]"
        print(f"  {row['method']:9s} {row['scope']:10s} {row['quantity']:14s}: {value}")
    print()

    if len(methods) == len(Method):
        print("Improved vs direct, per class:")
        for c in report.comparisons:
            print(
                f"  class {c.class_id}: service curve dominates={c.service_curve_dominates}, "
                f"rate not lower={c.rate_not_lower}, error not higher={c.error_not_higher}"
            )
        print()


def cmd_bounds(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = compare(config)
    methods = _methods(args.method)

    if args.out:
        Path(args.out).write_text(to_json(report_to_record(report, methods)) + "\n")
    if args.json:
        print(to_json(report_to_record(report, methods)))
    else:
        print_report(report, methods)
        if args.out:
            print(f"Report written to: {args.out}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    header: Dict[str, Any] = {'generator': args.mode, 'system': config.name}

    if args.mode == 'greedy':
        tagged = args.tagged if args.tagged is not None else config.class_ids[-1]
        trace = greedy_burst(config, tagged, shuffle_seed=args.shuffle_seed)
        header.update({'tagged': tagged, 'shuffle_seed': args.shuffle_seed})
    else:
        trace = shaped_random(config, args.seed, args.horizon, args.intensity)
        header.update({
            'seed': args.seed,
            'horizon': args.horizon,
            'intensity': args.intensity,
        })

    write_trace(trace, args.out, header)
    conformant = conformance_check(trace) is None

    if args.json:
        print(to_json({
            'trace': str(args.out),
            'packets': len(trace),
            'conformant': conformant,
            **header,
        }))
    else:
        banner(f"GENERATE - {args.mode} traffic for {config.name}")
        for key, value in header.items():
            print(f"  {key:13s}: {value}")
        print(f"  {'packets':13s}: {len(trace):,}")
        print(f"  {'conformant':13s}: {conformant}")
        print()
        print(f"Trace written to: {args.out}")
    return 0


def _backlog_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}_backlog.csv")


def _schedule_summary(trace: Trace, schedule: Schedule) -> Dict[str, Any]:
    peak = backlog_process(trace, schedule).supremum
    return {
        'packets': len(trace),
        'max_delay': exact(schedule.max_delay),
        'max_delay_seconds': decimal(schedule.max_delay),
        'peak_backlog': exact(peak),
        'peak_backlog_bits': decimal(peak),
        'last_departure': exact(schedule.departures[-1]) if schedule.departures else None,
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    trace = read_trace(args.trace, config)
    schedule = simulate(trace)
    summary = _schedule_summary(trace, schedule)

    if args.out:
        out = Path(args.out)
        write_schedule(schedule, out)
        write_backlog(backlog_process(trace, schedule), _backlog_path(out))
        summary['schedule'] = str(out)
        summary['backlog'] = str(_backlog_path(out))

    if args.json:
        print(to_json(summary))
    else:
        banner(f"SIMULATE - {args.trace}")
        print(f"Packets: {len(trace):,}")
        print(f"Max delay: {_fmt(schedule.max_delay)} s")
        print(f"Peak backlog: {_fmt(backlog_process(trace, schedule).supremum)} bits")
        if args.out:
            print()
            print(f"Schedule written to: {summary['schedule']}")
            print(f"Backlog written to: {summary['backlog']}")
    return 0


def print_suite(result: SuiteResult, limit: int = 20) -> None:
    print(f"Checks run: {len(result.checks_run)}")
    for check in result.checks_run:
        tightest = result.tightest.get(check)
        if tightest is None:
            print(f"  {check:40s}: passed")
            continue
        note = '  <- tight' if tightest.margin == 0 else ''
        print(f"  {check:40s}: min margin {_fmt(tightest.margin)}{note}")
    print()

    if result.passed:
        print("No violations.")
        return
    print(f"Violations: {len(result.violations):,}")
    for v in result.violations[:limit]:
        print(
            f"  [{v.kind}] {v.check} at {v.location}: observed {_fmt(v.observed)}, "
            f"bound {_fmt(v.bound)}, margin {_fmt(v.margin)}"
        )
    if len(result.violations) > limit:
        print(f"  ... {len(result.violations) - limit:,} more")


def cmd_verify(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    trace = read_trace(args.trace, config)
    if args.schedule:
        schedule = read_schedule(args.schedule, trace)
    else:
        schedule = simulate(trace)
    result = run_suite(schedule, compare(config), args.which)

    if args.out:
        violations_table(result.violations).to_csv(args.out, index=False)

    if args.json:
        print(to_json(suite_record(result)))
    else:
        banner(f"VERIFY - {args.trace} ({args.which})")
        print_suite(result)
        if args.out:
            print(f"\nViolations written to: {args.out}")
    return 0 if result.passed else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    seeds = range(args.seed, args.seed + args.seeds)
    pipeline = ValidationPipeline(config)

    if not args.json:
        banner(f"SWEEP - {config.name}")
    pipeline.run_sweep(
        seeds,
        horizon=args.horizon,
        intensity=args.intensity,
        workers=args.workers,
        which=args.which,
        quiet=args.json
    )
    report = pipeline.generate_quality_report()
    if args.out:
        pipeline.export_for_review(args.out, quiet=args.json)

    if args.json:
        print(to_json(report))
    else:
        print()
        banner("SWEEP REPORT")
        print(f"Runs: {report['total_runs']:,}")
        print(f"Passed: {report['passed_runs']:,}")
        print(f"Failed: {report['failed_runs']:,}")
        print(f"Pass rate: {report['pass_rate']:.1f}%")
        print(f"Packets simulated: {report['total_packets']:,}")
        if 'delay_bound_usage' in report:
            print(f"Max delay / delay bound: {report['delay_bound_usage']:.1f}%")
        if 'backlog_bound_usage' in report:
            print(f"Peak backlog / backlog bound: {report['backlog_bound_usage']:.1f}%")
        for check, count in report.get('violated_check_distribution', {}).items():
            print(f"  {check:40s}: {count:5,} runs")
        print()
    return 0 if report['failed_runs'] == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Delay, backlog and service bounds for multiclass FIFO systems'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            '--config',
            required=True,
            help=f"System config CSV, or a bundled system: {', '.join(EXAMPLE_SYSTEMS)}"
        )
        sub.add_argument(
            '--json',
            action='store_true',
            help='Print machine-readable JSON instead of the summary'
        )

    bounds = commands.add_parser('bounds', help='Compute and compare bounds')
    add_common(bounds)
    bounds.add_argument('--method', choices=METHOD_CHOICES, default='both',
                        help='Method to report (default: both)')
    bounds.add_argument('--out', help='Also write the JSON report to this file')
    bounds.set_defaults(handler=cmd_bounds)

    generate = commands.add_parser('generate', help='Write a conformant trace')
    add_common(generate)
    generate.add_argument('--mode', choices=('greedy', 'random'), default='greedy',
                          help='Greedy worst-case burst or shaped random (default: greedy)')
    generate.add_argument('--seed', type=int, default=42, help='Random seed (default: 42)')
    generate.add_argument('--horizon', type=parse_quantity, default=Fraction(10),
                          help='Random trace horizon in seconds (default: 10)')
    generate.add_argument('--intensity', type=parse_quantity, default=Fraction(9, 10),
                          help='Offered load as a fraction of each rate (default: 0.9)')
    generate.add_argument('--tagged', type=int,
                          help='Class served last in a greedy burst (default: last class)')
    generate.add_argument('--shuffle-seed', type=int,
                          help='Shuffle the untagged burst packets with this seed')
    generate.add_argument('--out', required=True, help='Trace file to write')
    generate.set_defaults(handler=cmd_generate)

    simulate_cmd = commands.add_parser('simulate', help='Simulate a trace')
    add_common(simulate_cmd)
    simulate_cmd.add_argument('--trace', required=True, help='Trace CSV')
    simulate_cmd.add_argument('--out', help='Schedule CSV to write (backlog goes next to it)')
    simulate_cmd.set_defaults(handler=cmd_simulate)

    verify = commands.add_parser('verify', help='Check a trace against every guarantee')
    add_common(verify)
    verify.add_argument('--trace', required=True, help='Trace CSV')
    verify.add_argument('--schedule', help='Verify this schedule instead of simulating')
    verify.add_argument('--which', choices=SUITE_SELECTIONS, default='all',
                        help='Checks to run (default: all)')
    verify.add_argument('--out', help='Write violations to this CSV')
    verify.set_defaults(handler=cmd_verify)

    sweep = commands.add_parser('sweep', help='Verify many seeded random traces')
    add_common(sweep)
    sweep.add_argument('--seeds', type=int, default=100, help='Number of seeds (default: 100)')
    sweep.add_argument('--seed', type=int, default=0, help='First seed (default: 0)')
    sweep.add_argument('--horizon', type=parse_quantity, default=Fraction(10),
                       help='Trace horizon in seconds (default: 10)')
    sweep.add_argument('--intensity', type=parse_quantity, default=Fraction(9, 10),
                       help='Offered load as a fraction of each rate (default: 0.9)')
    sweep.add_argument('--workers', type=int, default=1,
                       help='Worker processes (default: 1)')
    sweep.add_argument('--which', choices=SUITE_SELECTIONS, default='all',
                       help='Checks to run (default: all)')
    sweep.add_argument('--out', help='Directory for the sweep CSV exports')
    sweep.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except FileNotFoundError as e:
        print(f"Error: file not found: {e.filename}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"Error: cannot parse config {args.config}:", file=sys.stderr)
        for message in e.messages:
            print(f"  {message}", file=sys.stderr)
        return 2
    except ConfigValidationError as e:
        print(f"Error: invalid config {args.config}:", file=sys.stderr)
        for violation in e.violations:
            print(f"  {violation}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
