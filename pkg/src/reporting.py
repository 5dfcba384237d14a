"""
Report Serialization
JSON-ready records and pandas tables for bound reports, schedules and
verification results. Exact values are 'p/q' strings; decimals are for
reading only.
"""

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from curve_algebra import INFINITY, Curve
from bounds import (
    BacklogBound,
    BoundReport,
    ClassBounds,
    GrGuarantee,
    Method,
    MethodBounds,
    NotApplicable,
)
from verify import Observation, SuiteResult


def exact(value: Any) -> Optional[str]:
    if value is None:
        return None
    if value == INFINITY:
        return 'inf'
    return str(Fraction(value))


def decimal(value: Any) -> Optional[float]:
    if value is None:
        return None
    return float(value)


def convert_to_native(obj: Any) -> Any:
    """Convert numpy and Fraction values so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {k: convert_to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [convert_to_native(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return exact(obj)
    return obj


def to_json(record: Any) -> str:
    return json.dumps(convert_to_native(record), indent=2)


def _value_record(value: Union[Fraction, NotApplicable]) -> Dict[str, Any]:
    if isinstance(value, NotApplicable):
        return {'applicable': False, 'reason': value.reason}
    return {'applicable': True, 'value': exact(value), 'decimal': decimal(value)}


def _guarantee_record(guarantee: Union[GrGuarantee, NotApplicable]) -> Dict[str, Any]:
    if isinstance(guarantee, NotApplicable):
        return {'applicable': False, 'reason': guarantee.reason}
    return {
        'applicable': True,
        'rate': exact(guarantee.rate),
        'rate_decimal': decimal(guarantee.rate),
        'error': exact(guarantee.error),
        'error_decimal': decimal(guarantee.error),
    }


def _curve_record(curve: Union[Curve, NotApplicable]) -> Dict[str, Any]:
    if isinstance(curve, NotApplicable):
        return {'applicable': False, 'reason': curve.reason}
    return {'applicable': True, 'text': str(curve), **curve.to_record()}


def _backlog_record(backlog: Union[BacklogBound, NotApplicable]) -> Dict[str, Any]:
    if isinstance(backlog, NotApplicable):
        return {'applicable': False, 'reason': backlog.reason}
    return {
        'applicable': True,
        'value': exact(backlog.value),
        'decimal': decimal(backlog.value),
        'envelope_part': exact(backlog.envelope_part),
        'reference_part': exact(backlog.reference_part),
        'winner': backlog.winner,
    }


def _class_record(entry: ClassBounds) -> Dict[str, Any]:
    return {
        'class_id': entry.class_id,
        'guarantee': _guarantee_record(entry.guarantee),
        'service_curve': _curve_record(entry.service_curve),
        'delay': _value_record(entry.delay),
        'backlog': _value_record(entry.backlog),
    }


def _method_record(bounds: MethodBounds) -> Dict[str, Any]:
    return {
        'delay': _value_record(bounds.delay),
        'backlog': _backlog_record(bounds.backlog),
        'classes': [_class_record(entry) for entry in bounds.classes],
    }


def report_to_record(
    report: BoundReport,
    methods: Optional[List[Method]] = None
) -> Dict[str, Any]:
    """
    Machine-readable bound report.

    Args:
        report: Output of bounds.compare.
        methods: Methods to include (default both). The comparison section
            is only emitted when both are present.
    """
    methods = list(Method) if methods is None else [Method(m) for m in methods]
    record: Dict[str, Any] = {
        'system': report.system,
        'rho': exact(report.utilization.rho),
        'rho_decimal': decimal(report.utilization.rho),
        'stability': report.stability,
        'aggregate_guarantee': _guarantee_record(report.aggregate_guarantee),
        'aggregate_service_curve': _curve_record(report.aggregate_service_curve),
    }
    for method in methods:
        record[method.value] = _method_record(report.bounds(method))
    if len(methods) == len(Method):
        record['comparison'] = [
            {
                'class_id': c.class_id,
                'service_curve_dominates': c.service_curve_dominates,
                'rate_not_lower': c.rate_not_lower,
                'error_not_higher': c.error_not_higher,
            }
            for c in report.comparisons
        ]
    return record


def _row(quantity: str, scope: str, method: Method, value: Any) -> Dict[str, Any]:
    if isinstance(value, NotApplicable):
        return {
            'quantity': quantity, 'scope': scope, 'method': method.value,
            'value': None, 'decimal': None, 'note': f'n/a: {value.reason}',
        }
    return {
        'quantity': quantity, 'scope': scope, 'method': method.value,
        'value': exact(value), 'decimal': decimal(value), 'note': '',
    }


def report_table(
    report: BoundReport,
    methods: Optional[List[Method]] = None
) -> pd.DataFrame:
    """One row per (quantity, scope, method), exact and decimal columns."""
    methods = list(Method) if methods is None else [Method(m) for m in methods]
    rows: List[Dict[str, Any]] = []
    for method in methods:
        bounds = report.bounds(method)
        rows.append(_row('delay', 'aggregate', method, bounds.delay))
        if isinstance(bounds.backlog, BacklogBound):
            row = _row('backlog', 'aggregate', method, bounds.backlog.value)
            if bounds.backlog.reference_part is not None:
                row['note'] = (
                    f"parts {exact(bounds.backlog.envelope_part)} / "
                    f"{exact(bounds.backlog.reference_part)}, "
                    f"{bounds.backlog.winner} wins"
                )
            rows.append(row)
        else:
            rows.append(_row('backlog', 'aggregate', method, bounds.backlog))

        for entry in bounds.classes:
            scope = f'class {entry.class_id}'
            if isinstance(entry.guarantee, GrGuarantee):
                rows.append(_row('gr rate', scope, method, entry.guarantee.rate))
                rows.append(_row('gr error', scope, method, entry.guarantee.error))
            else:
                rows.append(_row('gr rate', scope, method, entry.guarantee))
            curve = entry.service_curve
            rows.append({
                'quantity': 'service curve', 'scope': scope,
                'method': method.value,
                'value': None if isinstance(curve, NotApplicable) else str(curve),
                'decimal': None,
                'note': f'n/a: {curve.reason}' if isinstance(curve, NotApplicable) else '',
            })
            rows.append(_row('delay', scope, method, entry.delay))
            rows.append(_row('backlog', scope, method, entry.backlog))
    return pd.DataFrame(rows, columns=['quantity', 'scope', 'method', 'value', 'decimal', 'note'])


def observation_record(observation: Observation) -> Dict[str, Any]:
    return {
        'kind': observation.kind,
        'check': observation.check,
        'location': observation.location,
        'observed': exact(observation.observed),
        'bound': exact(observation.bound),
        'margin': exact(observation.margin),
        'margin_decimal': decimal(observation.margin),
    }


def violations_table(violations: List[Observation]) -> pd.DataFrame:
    return pd.DataFrame(
        [observation_record(v) for v in violations],
        columns=['kind', 'check', 'location', 'observed', 'bound', 'margin', 'margin_decimal']
    )


def suite_record(result: SuiteResult) -> Dict[str, Any]:
    return {
        'passed': result.passed,
        'violation_count': len(result.violations),
        'checks_run': list(result.checks_run),
        'violations': [observation_record(v) for v in result.violations],
        'tightest': {
            check: observation_record(o) for check, o in result.tightest.items()
        },
    }
