"""Domain model for federated KPI monitoring.

The vocabulary chain is: a KPI tracks a goal through a critical success
factor; it is a function of metrics; metrics are expressions over
aggregated measures; measures are the atomic quantities observed at each
lab. Targets compare metrics against thresholds and actions are the
recommendations surfaced when a target is missed.

Everything here is a plain value type: construct, validate, share.
Nothing mutates after construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
LAB_ID_RE = re.compile(r"[a-z][a-z0-9_]*\Z")

#: Expression trees deeper than this are rejected as a catalog sanity bound.
MAX_EXPRESSION_DEPTH = 32


class CollectionFrequency(str, Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    QUARTERLY = "quarterly"
    PER_EVENT = "per_event"


class ValueType(str, Enum):
    NUMBER = "number"
    INTEGER = "integer"
    BOOLEAN = "boolean"
    CATEGORY = "category"


class Dimension(str, Enum):
    ECONOMIC = "economic"
    SOCIAL = "social"
    ENVIRONMENTAL = "environmental"
    TECHNICAL = "technical"


class AggFn(str, Enum):
    SUM = "sum"
    AVG = "avg"
    MIN = "min"
    MAX = "max"
    COUNT = "count"
    LAST = "last"


class Source(str, Enum):
    FORM = "form"
    REPORT = "report"
    FILE = "file"


class Status(str, Enum):
    MET = "met"
    NOT_MET = "not_met"
    INSUFFICIENT_DATA = "insufficient_data"


class PredicateOutcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    UNKNOWN = "unknown"


class _InsufficientData:
    """Sentinel for "the window lacked the data needed to compute this".

    A first-class value, not an error: labs have uneven collection
    capacity and missing data must stay visible instead of poisoning an
    evaluation with exceptions.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INSUFFICIENT_DATA"

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


INSUFFICIENT_DATA = _InsufficientData()

MetricValue = Union[float, _InsufficientData]


@dataclass(frozen=True)
class Duration:
    """A positive count of days, ISO weeks, or calendar months."""

    count: int
    unit: str  # "d", "w" or "m"

    def __str__(self) -> str:
        return f"{self.count}{self.unit}"


@dataclass
class LabProfile:
    id: str
    city: str
    country: str
    target_groups: list[str]
    description: str = ""


@dataclass(frozen=True)
class Scope:
    """Who collects a measure: everyone, or only the named labs."""

    kind: str  # "common" or "specific"
    lab_ids: tuple[str, ...] = ()

    @classmethod
    def common(cls) -> Scope:
        return cls(kind="common")

    @classmethod
    def specific(cls, lab_ids) -> Scope:
        return cls(kind="specific", lab_ids=tuple(lab_ids))

    def includes(self, lab_id: str) -> bool:
        return self.kind == "common" or lab_id in self.lab_ids


@dataclass
class MeasureDefinition:
    id: str
    name: str
    unit: str
    value_type: ValueType
    frequency: CollectionFrequency
    scope: Scope
    category_values: list[str] | None = None


@dataclass
class Observation:
    """One collected data point, as accepted by the store."""

    measure_id: str
    lab_id: str
    timestamp: datetime
    value: float | int | bool | str
    uploader_id: str
    source: Source
    ingested_at: datetime


@dataclass
class ReportTemplate:
    """A named bundle of measures submitted together under one timestamp."""

    id: str
    name: str
    measure_ids: list[str]


# --- metric expressions ---------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: float


@dataclass(frozen=True)
class Aggregate:
    fn: AggFn
    measure_id: str
    window_override: Duration | None = None


@dataclass(frozen=True)
class Binary:
    op: str  # "+", "-", "*", "/"
    left: ExpressionNode
    right: ExpressionNode


@dataclass(frozen=True)
class Negate:
    child: ExpressionNode


ExpressionNode = Union[Literal, Aggregate, Binary, Negate]


def expression_depth(expr: ExpressionNode) -> int:
    """Tree depth, computed iteratively so hostile inputs cannot blow the stack."""
    depth = 0
    stack: list[tuple[ExpressionNode, int]] = [(expr, 1)]
    while stack:
        node, d = stack.pop()
        depth = max(depth, d)
        if isinstance(node, Binary):
            stack.append((node.left, d + 1))
            stack.append((node.right, d + 1))
        elif isinstance(node, Negate):
            stack.append((node.child, d + 1))
    return depth


def expression_measure_ids(expr: ExpressionNode) -> list[str]:
    """Measure ids referenced anywhere in the expression, in visit order."""
    out: list[str] = []
    stack: list[ExpressionNode] = [expr]
    while stack:
        node = stack.pop(0)
        if isinstance(node, Aggregate):
            out.append(node.measure_id)
        elif isinstance(node, Binary):
            stack.insert(0, node.right)
            stack.insert(0, node.left)
        elif isinstance(node, Negate):
            stack.insert(0, node.child)
    return out


def expression_aggregates(expr: ExpressionNode) -> list[Aggregate]:
    out: list[Aggregate] = []
    stack: list[ExpressionNode] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Aggregate):
            out.append(node)
        elif isinstance(node, Binary):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Negate):
            stack.append(node.child)
    return out


def expression_literals(expr: ExpressionNode) -> list[float]:
    out: list[float] = []
    stack: list[ExpressionNode] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            out.append(node.value)
        elif isinstance(node, Binary):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Negate):
            stack.append(node.child)
    return out


@dataclass
class MetricDefinition:
    id: str
    expression: ExpressionNode


@dataclass(frozen=True)
class Predicate:
    metric_id: str
    comparator: str  # ">=", ">", "<=", "<", "=="
    threshold: float


COMPARATORS = (">=", ">", "<=", "<", "==")


@dataclass(frozen=True)
class TargetSpec:
    """Either a single predicate or a conjunction of at least two.

    A conjunctive target is met only when every predicate passes; one
    failing metric sinks the whole target.
    """

    conjunctive: bool
    predicates: tuple[Predicate, ...]

    @classmethod
    def single(cls, predicate: Predicate) -> TargetSpec:
        return cls(conjunctive=False, predicates=(predicate,))

    @classmethod
    def all_of(cls, predicates) -> TargetSpec:
        return cls(conjunctive=True, predicates=tuple(predicates))


@dataclass(frozen=True)
class ActionSpec:
    description: str


@dataclass
class KpiDefinition:
    id: str
    name: str
    dimension: Dimension
    created_by: str
    goal: str
    csf: str
    metrics: list[MetricDefinition]
    target: TargetSpec
    actions: list[ActionSpec]
    monitor_frequency: CollectionFrequency
    window: Duration

    def metric(self, metric_id: str) -> MetricDefinition | None:
        for m in self.metrics:
            if m.id == metric_id:
                return m
        return None

    def measure_ids(self) -> list[str]:
        """All measure ids referenced by this KPI's metrics (deduplicated, ordered)."""
        seen: dict[str, None] = {}
        for m in self.metrics:
            for mid in expression_measure_ids(m.expression):
                seen.setdefault(mid)
        return list(seen)


@dataclass
class EvaluationResult:
    kpi_id: str
    lab_id: str
    evaluated_at: datetime
    window_start: datetime
    window_end: datetime
    metric_values: dict[str, MetricValue]
    status: Status
    triggered_actions: list[ActionSpec]
    predicate_outcomes: dict[str, PredicateOutcome]


@dataclass(frozen=True)
class SeriesPoint:
    timestamp: datetime
    value: float


@dataclass
class Catalog:
    labs: list[LabProfile] = field(default_factory=list)
    measures: list[MeasureDefinition] = field(default_factory=list)
    reports: list[ReportTemplate] = field(default_factory=list)
    kpis: list[KpiDefinition] = field(default_factory=list)
    protocol_notes: str | None = None

    def lab(self, lab_id: str) -> LabProfile | None:
        for lab in self.labs:
            if lab.id == lab_id:
                return lab
        return None

    def measure(self, measure_id: str) -> MeasureDefinition | None:
        for m in self.measures:
            if m.id == measure_id:
                return m
        return None

    def report(self, report_id: str) -> ReportTemplate | None:
        for r in self.reports:
            if r.id == report_id:
                return r
        return None

    def kpi(self, kpi_id: str) -> KpiDefinition | None:
        for k in self.kpis:
            if k.id == kpi_id:
                return k
        return None

    def applicable_labs(self, kpi: KpiDefinition) -> list[str]:
        """Labs that can evaluate the KPI: every referenced measure is in scope."""
        needed = kpi.measure_ids()
        out = []
        for lab in self.labs:
            ok = True
            for mid in needed:
                measure = self.measure(mid)
                if measure is None or not measure.scope.includes(lab.id):
                    ok = False
                    break
            if ok:
                out.append(lab.id)
        return out


# --- validation ------------------------------------------------------------


@dataclass(frozen=True)
class CatalogError:
    """One broken invariant: a machine-readable code plus the offending id."""

    code: str
    kind: str  # "lab", "measure", "report", "kpi"
    subject_id: str
    message: str


def _err(errors: list[CatalogError], code: str, kind: str, subject: str, message: str) -> None:
    errors.append(CatalogError(code=code, kind=kind, subject_id=subject, message=message))


def _check_finite(errors: list[CatalogError], kind: str, subject: str, value: float, what: str) -> None:
    if not math.isfinite(value):
        _err(errors, "non_finite_number", kind, subject, f"{what} must be a finite number, got {value!r}")


def validate_catalog(catalog: Catalog) -> list[CatalogError]:
    """Check every invariant of every contained definition.

    Returns an empty list iff the catalog is internally consistent.
    Deterministic and order-independent: permuting declaration order
    yields the same error multiset.
    """
    errors: list[CatalogError] = []

    lab_ids = {lab.id for lab in catalog.labs}
    measure_by_id = {m.id: m for m in catalog.measures}

    seen: set[str] = set()
    for lab in catalog.labs:
        if lab.id in seen:
            _err(errors, "duplicate_id", "lab", lab.id, f"duplicate lab id {lab.id!r}")
        seen.add(lab.id)
        if not LAB_ID_RE.match(lab.id or ""):
            _err(errors, "bad_lab_id", "lab", lab.id,
                 f"lab id {lab.id!r} must match [a-z][a-z0-9_]*")
        if not lab.target_groups:
            _err(errors, "empty_target_groups", "lab", lab.id,
                 f"lab {lab.id!r} declares no target groups")

    seen = set()
    for m in catalog.measures:
        if m.id in seen:
            _err(errors, "duplicate_id", "measure", m.id, f"duplicate measure id {m.id!r}")
        seen.add(m.id)
        if not IDENT_RE.match(m.id or ""):
            _err(errors, "bad_id", "measure", m.id, f"measure id {m.id!r} is not a valid identifier")
        if m.value_type is ValueType.CATEGORY:
            if not m.category_values:
                _err(errors, "category_values_missing", "measure", m.id,
                     f"category measure {m.id!r} must list its category values")
            else:
                if len(set(m.category_values)) != len(m.category_values):
                    _err(errors, "duplicate_category_value", "measure", m.id,
                         f"category measure {m.id!r} lists duplicate category values")
        elif m.category_values is not None:
            _err(errors, "category_values_unexpected", "measure", m.id,
                 f"measure {m.id!r} has type {m.value_type.value} and must not list category values")
        if m.scope.kind == "specific":
            if not m.scope.lab_ids:
                _err(errors, "empty_scope_labs", "measure", m.id,
                     f"specific-scope measure {m.id!r} names no labs")
            if len(set(m.scope.lab_ids)) != len(m.scope.lab_ids):
                _err(errors, "duplicate_scope_lab", "measure", m.id,
                     f"specific-scope measure {m.id!r} names a lab twice")
            for lid in m.scope.lab_ids:
                if lid not in lab_ids:
                    _err(errors, "unresolved_lab_ref", "measure", m.id,
                         f"measure {m.id!r} scope names undeclared lab {lid!r}")

    seen = set()
    for r in catalog.reports:
        if r.id in seen:
            _err(errors, "duplicate_id", "report", r.id, f"duplicate report id {r.id!r}")
        seen.add(r.id)
        if not IDENT_RE.match(r.id or ""):
            _err(errors, "bad_id", "report", r.id, f"report id {r.id!r} is not a valid identifier")
        if not r.measure_ids:
            _err(errors, "empty_report_measures", "report", r.id,
                 f"report {r.id!r} lists no measures")
        if len(set(r.measure_ids)) != len(r.measure_ids):
            _err(errors, "duplicate_report_measure", "report", r.id,
                 f"report {r.id!r} lists a measure twice")
        for mid in r.measure_ids:
            if mid not in measure_by_id:
                _err(errors, "unresolved_measure_ref", "report", r.id,
                     f"report {r.id!r} references undeclared measure {mid!r}")

    seen = set()
    for k in catalog.kpis:
        if k.id in seen:
            _err(errors, "duplicate_id", "kpi", k.id, f"duplicate KPI id {k.id!r}")
        seen.add(k.id)
        if not IDENT_RE.match(k.id or ""):
            _err(errors, "bad_id", "kpi", k.id, f"KPI id {k.id!r} is not a valid identifier")
        _validate_kpi(errors, catalog, measure_by_id, k)

    return errors


def _validate_kpi(errors: list[CatalogError], catalog: Catalog,
                  measure_by_id: dict[str, MeasureDefinition], kpi: KpiDefinition) -> None:
    if not kpi.metrics:
        _err(errors, "empty_metrics", "kpi", kpi.id, f"KPI {kpi.id!r} declares no metrics")
    metric_ids: set[str] = set()
    for metric in kpi.metrics:
        if metric.id in metric_ids:
            _err(errors, "duplicate_id", "kpi", kpi.id,
                 f"KPI {kpi.id!r} declares metric {metric.id!r} twice")
        metric_ids.add(metric.id)
        if not IDENT_RE.match(metric.id or ""):
            _err(errors, "bad_id", "kpi", kpi.id,
                 f"metric id {metric.id!r} in KPI {kpi.id!r} is not a valid identifier")
        _validate_expression(errors, measure_by_id, kpi, metric)

    if kpi.target.conjunctive and len(kpi.target.predicates) < 2:
        _err(errors, "conjunctive_too_few", "kpi", kpi.id,
             f"conjunctive target of KPI {kpi.id!r} needs at least two predicates")
    if not kpi.target.conjunctive and len(kpi.target.predicates) != 1:
        _err(errors, "bad_target_arity", "kpi", kpi.id,
             f"single target of KPI {kpi.id!r} must hold exactly one predicate")
    for pred in kpi.target.predicates:
        if pred.metric_id not in metric_ids:
            _err(errors, "unresolved_metric_ref", "kpi", pred.metric_id,
                 f"KPI {kpi.id!r} target references undeclared metric {pred.metric_id!r}")
        if pred.comparator not in COMPARATORS:
            _err(errors, "bad_comparator", "kpi", kpi.id,
                 f"KPI {kpi.id!r} uses unknown comparator {pred.comparator!r}")
        _check_finite(errors, "kpi", kpi.id, pred.threshold,
                      f"threshold for metric {pred.metric_id!r} in KPI {kpi.id!r}")

    if not kpi.actions:
        _err(errors, "empty_actions", "kpi", kpi.id, f"KPI {kpi.id!r} declares no actions")
    for action in kpi.actions:
        if not action.description:
            _err(errors, "empty_action_description", "kpi", kpi.id,
                 f"KPI {kpi.id!r} has an action with an empty description")

    for dur, what in ((kpi.window, "window"),):
        if dur.count < 1:
            _err(errors, "bad_duration", "kpi", kpi.id,
                 f"KPI {kpi.id!r} {what} count must be >= 1")
        if dur.unit not in ("d", "w", "m"):
            _err(errors, "bad_duration", "kpi", kpi.id,
                 f"KPI {kpi.id!r} {what} unit must be d, w or m")


def _validate_expression(errors: list[CatalogError], measure_by_id: dict[str, MeasureDefinition],
                         kpi: KpiDefinition, metric: MetricDefinition) -> None:
    if expression_depth(metric.expression) > MAX_EXPRESSION_DEPTH:
        _err(errors, "expression_too_deep", "kpi", kpi.id,
             f"metric {metric.id!r} in KPI {kpi.id!r} exceeds depth {MAX_EXPRESSION_DEPTH}")
    for value in expression_literals(metric.expression):
        _check_finite(errors, "kpi", kpi.id,
                      value, f"literal in metric {metric.id!r} of KPI {kpi.id!r}")
    for agg in expression_aggregates(metric.expression):
        measure = measure_by_id.get(agg.measure_id)
        if measure is None:
            _err(errors, "unresolved_measure_ref", "kpi", agg.measure_id,
                 f"metric {metric.id!r} in KPI {kpi.id!r} references undeclared measure {agg.measure_id!r}")
        elif measure.value_type in (ValueType.BOOLEAN, ValueType.CATEGORY) and agg.fn is not AggFn.COUNT:
            _err(errors, "bad_aggregate_fn", "kpi", kpi.id,
                 f"{measure.value_type.value} measure {measure.id!r} only supports count, "
                 f"metric {metric.id!r} uses {agg.fn.value}")
        if agg.window_override is not None:
            if agg.window_override.count < 1 or agg.window_override.unit not in ("d", "w", "m"):
                _err(errors, "bad_duration", "kpi", kpi.id,
                     f"aggregate window override in metric {metric.id!r} of KPI {kpi.id!r} is invalid")
