"""KPI evaluation: metric expressions over observation windows, target
checks, and stepped status series.

Conventions that everything downstream relies on:

- Evaluation windows are half-open ``(start, end]`` so an observation
  timestamped exactly at the evaluation instant counts once and stepped
  series never double-count.
- ``insufficient_data`` is absorbing through arithmetic: if any operand
  of an expression is unknown, so is the expression. Division by zero is
  treated the same way (with a note) rather than as an error.
- A failing predicate is decisive: a conjunctive target reports
  ``not_met`` as soon as one metric fails, even while sibling metrics
  are still unknown, so actions trigger the moment failure is certain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Iterable, Protocol

from .model import (
    INSUFFICIENT_DATA,
    ActionSpec,
    AggFn,
    Aggregate,
    Binary,
    Catalog,
    Duration,
    EvaluationResult,
    ExpressionNode,
    KpiDefinition,
    Literal,
    MetricValue,
    Negate,
    Observation,
    Predicate,
    PredicateOutcome,
    Status,
    TargetSpec,
)
from .timeutil import add_duration, subtract_duration

#: Absolute tolerance for the `==` comparator on real-valued metrics.
EQUALITY_TOLERANCE = 1e-9


class EngineError(Exception):
    pass


class UnknownKpi(EngineError):
    pass


class UnknownLab(EngineError):
    pass


class LabOutOfScope(EngineError):
    """The KPI aggregates a specific-scope measure this lab does not collect."""


@dataclass(frozen=True)
class EvaluationRequest:
    kpi_id: str
    lab_id: str
    evaluated_at: datetime
    window_override: Duration | None = None


# An evaluation store only needs to answer "which observations of this
# measure fall in (start, end] for this lab" and persist results.
class ObservationSource(Protocol):
    def select(self, lab_id: str, measure_id: str,
               start: datetime, end: datetime) -> list[Observation]: ...


SeriesLookup = Callable[[str, datetime, datetime], list[Observation]]


def _numeric(value: float | int | bool | str) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    return float(value)  # type: ignore[arg-type]


def aggregate(fn: AggFn, observations: Iterable[Observation]) -> MetricValue:
    """Fold one measure's windowed observations into a number.

    count is defined on every value type (true and false both count) and
    is 0 on an empty window; the numeric folds have no defensible value
    on an empty window and yield insufficient_data instead.
    """
    obs = list(observations)
    if fn is AggFn.COUNT:
        return float(len(obs))
    if not obs:
        return INSUFFICIENT_DATA
    values = [_numeric(o.value) for o in obs]
    if fn is AggFn.SUM:
        return math.fsum(values)
    if fn is AggFn.AVG:
        return math.fsum(values) / len(values)
    if fn is AggFn.MIN:
        return min(values)
    if fn is AggFn.MAX:
        return max(values)
    if fn is AggFn.LAST:
        return values[-1]
    raise ValueError(f"unknown aggregation {fn!r}")


def eval_expression(expr: ExpressionNode, lookup: SeriesLookup,
                    window_start: datetime, window_end: datetime,
                    notes: list[str] | None = None) -> MetricValue:
    """Evaluate a metric expression over (window_start, window_end].

    An aggregate with a window override keeps the window end and pulls
    its start back by the override, affecting that aggregate only.
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Aggregate):
        start = window_start
        if expr.window_override is not None:
            start = subtract_duration(window_end, expr.window_override)
        return aggregate(expr.fn, lookup(expr.measure_id, start, window_end))
    if isinstance(expr, Negate):
        value = eval_expression(expr.child, lookup, window_start, window_end, notes)
        if value is INSUFFICIENT_DATA:
            return INSUFFICIENT_DATA
        return -value  # type: ignore[operator]
    if isinstance(expr, Binary):
        left = eval_expression(expr.left, lookup, window_start, window_end, notes)
        right = eval_expression(expr.right, lookup, window_start, window_end, notes)
        if left is INSUFFICIENT_DATA or right is INSUFFICIENT_DATA:
            return INSUFFICIENT_DATA
        if expr.op == "+":
            return left + right  # type: ignore[operator]
        if expr.op == "-":
            return left - right  # type: ignore[operator]
        if expr.op == "*":
            return left * right  # type: ignore[operator]
        if expr.op == "/":
            if right == 0:
                if notes is not None:
                    notes.append("division by zero")
                return INSUFFICIENT_DATA
            return left / right  # type: ignore[operator]
        raise ValueError(f"unknown operator {expr.op!r}")
    raise TypeError(f"not an expression node: {expr!r}")


def check_predicate(predicate: Predicate, value: MetricValue) -> PredicateOutcome:
    if value is INSUFFICIENT_DATA:
        return PredicateOutcome.UNKNOWN
    v: float = value  # type: ignore[assignment]
    t = predicate.threshold
    op = predicate.comparator
    if op == ">=":
        ok = v >= t
    elif op == ">":
        ok = v > t
    elif op == "<=":
        ok = v <= t
    elif op == "<":
        ok = v < t
    elif op == "==":
        ok = abs(v - t) <= EQUALITY_TOLERANCE
    else:
        raise ValueError(f"unknown comparator {op!r}")
    return PredicateOutcome.PASS if ok else PredicateOutcome.FAIL


_OUTCOME_RANK = {PredicateOutcome.PASS: 0, PredicateOutcome.UNKNOWN: 1, PredicateOutcome.FAIL: 2}


def eval_target(target: TargetSpec,
                metric_values: dict[str, MetricValue]) -> tuple[Status, dict[str, PredicateOutcome]]:
    """Combine predicate outcomes into a KPI status.

    met iff every predicate passes; not_met as soon as any predicate
    fails (decisive even with unknowns around); insufficient_data when
    nothing failed but at least one predicate could not be decided.
    Raises KeyError if a referenced metric has no value at all.
    """
    outcomes: dict[str, PredicateOutcome] = {}
    any_fail = False
    any_unknown = False
    for predicate in target.predicates:
        outcome = check_predicate(predicate, metric_values[predicate.metric_id])
        any_fail = any_fail or outcome is PredicateOutcome.FAIL
        any_unknown = any_unknown or outcome is PredicateOutcome.UNKNOWN
        previous = outcomes.get(predicate.metric_id)
        # Two predicates may constrain the same metric; keep the worst outcome.
        if previous is None or _OUTCOME_RANK[outcome] > _OUTCOME_RANK[previous]:
            outcomes[predicate.metric_id] = outcome
    if any_fail:
        status = Status.NOT_MET
    elif any_unknown:
        status = Status.INSUFFICIENT_DATA
    else:
        status = Status.MET
    return status, outcomes


def _resolve(catalog: Catalog, kpi_id: str, lab_id: str) -> KpiDefinition:
    kpi = catalog.kpi(kpi_id)
    if kpi is None:
        raise UnknownKpi(f"unknown kpi {kpi_id!r}")
    if catalog.lab(lab_id) is None:
        raise UnknownLab(f"unknown lab {lab_id!r}")
    for measure_id in kpi.measure_ids():
        measure = catalog.measure(measure_id)
        if measure is not None and not measure.scope.includes(lab_id):
            raise LabOutOfScope(
                f"lab {lab_id!r} does not collect measure {measure_id!r} needed by kpi {kpi_id!r}")
    return kpi


def evaluate(request: EvaluationRequest, catalog: Catalog, store,
             persist: bool = True) -> EvaluationResult:
    """Evaluate one KPI for one lab at one instant.

    The window ends at the evaluation instant and reaches back by the
    KPI's window (or the request's override). With persist=True the
    result is appended to the store's evaluation history as an audit
    record; view-style queries recompute instead of reading history so
    backfilled data is always reflected.
    """
    kpi = _resolve(catalog, request.kpi_id, request.lab_id)
    window = request.window_override or kpi.window
    window_end = request.evaluated_at
    window_start = subtract_duration(window_end, window)

    def lookup(measure_id: str, start: datetime, end: datetime) -> list[Observation]:
        return store.select(request.lab_id, measure_id, start, end)

    metric_values: dict[str, MetricValue] = {}
    for metric in kpi.metrics:
        metric_values[metric.id] = eval_expression(
            metric.expression, lookup, window_start, window_end)

    status, outcomes = eval_target(kpi.target, metric_values)
    actions: list[ActionSpec] = list(kpi.actions) if status is Status.NOT_MET else []
    result = EvaluationResult(
        kpi_id=kpi.id,
        lab_id=request.lab_id,
        evaluated_at=request.evaluated_at,
        window_start=window_start,
        window_end=window_end,
        metric_values=metric_values,
        status=status,
        triggered_actions=actions,
        predicate_outcomes=outcomes,
    )
    if persist:
        store.append_evaluation(result)
    return result


def kpi_status_series(kpi_id: str, lab_id: str, start: datetime, end: datetime,
                      step: Duration, catalog: Catalog, store) -> list[tuple[datetime, Status]]:
    """Status at start + k*step for every instant up to and including end.

    A pure read: nothing is persisted. start == end yields one point.
    """
    if end < start:
        raise ValueError("series end precedes start")
    if step.count < 1:
        raise ValueError("step must be at least one day")
    points: list[tuple[datetime, Status]] = []
    k = 0
    while True:
        instant = add_duration(start, step, times=k)
        if instant > end:
            break
        result = evaluate(EvaluationRequest(kpi_id=kpi_id, lab_id=lab_id, evaluated_at=instant),
                          catalog, store, persist=False)
        points.append((instant, result.status))
        k += 1
    return points
