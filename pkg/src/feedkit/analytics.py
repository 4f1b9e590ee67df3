"""Federation-level views: the cross-lab status matrix and intra-lab
trade-off detection.

Correlation here is descriptive, not causal: a strongly negative
coefficient between two metric trajectories flags a *candidate*
trade-off for humans to investigate, nothing more. Trade-offs are
computed within one lab (metric trajectories of the same site moving
against each other); cross-lab correlation is deliberately not
implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime

from .engine import EngineError, EvaluationRequest, eval_expression, evaluate
from .model import (
    INSUFFICIENT_DATA,
    Catalog,
    Duration,
    SeriesPoint,
    Status,
)
from .timeutil import add_duration, subtract_duration

#: Aligned metric pairs correlating at or below this are flagged as
#: candidate trade-offs. Moderate negative keeps the list short; callers
#: may pass their own threshold.
TRADEOFF_FLAG_THRESHOLD = -0.5

#: Pearson is undefined on fewer than this many paired samples.
MIN_SAMPLES = 3


class LengthMismatch(ValueError):
    pass


class SummaryStatus:
    MET = "met"
    NOT_MET = "not_met"
    INSUFFICIENT_DATA = "insufficient_data"
    NOT_APPLICABLE = "not_applicable"


@dataclass
class FederationRow:
    kpi_id: str
    statuses: dict[str, str]  # lab id -> SummaryStatus value
    notes: dict[str, str] = field(default_factory=dict)


@dataclass
class FederationSummary:
    evaluated_at: datetime
    rows: list[FederationRow]


@dataclass(frozen=True)
class TradeoffFlag:
    first: tuple[str, str]  # (kpi_id, metric_id)
    second: tuple[str, str]
    r: float


@dataclass
class TradeoffMatrix:
    lab_id: str
    window_start: datetime
    window_end: datetime
    sample_step: Duration
    metric_ids: list[tuple[str, str]]
    r: list[list[float | None]]  # None where undefined
    flags: list[TradeoffFlag]


def pearson(x: list[float], y: list[float]) -> float | None:
    """Sample Pearson correlation; None when undefined (fewer than three
    samples or a constant input). Results are clamped into [-1, 1]."""
    if len(x) != len(y):
        raise LengthMismatch(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < MIN_SAMPLES:
        return None
    if min(x) == max(x) or min(y) == max(y):
        return None
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def federation_summary(catalog: Catalog, store, evaluated_at: datetime) -> FederationSummary:
    """One status cell per (KPI, lab) at the given instant.

    Labs out of scope for a KPI's measures are not_applicable; evaluation
    errors fold into not_applicable with a note. Rows follow catalog KPI
    order. A pure read: nothing is persisted.
    """
    rows: list[FederationRow] = []
    for kpi in catalog.kpis:
        row = FederationRow(kpi_id=kpi.id, statuses={})
        applicable = set(catalog.applicable_labs(kpi))
        for lab in catalog.labs:
            if lab.id not in applicable:
                row.statuses[lab.id] = SummaryStatus.NOT_APPLICABLE
                continue
            try:
                result = evaluate(
                    EvaluationRequest(kpi_id=kpi.id, lab_id=lab.id, evaluated_at=evaluated_at),
                    catalog, store, persist=False)
            except EngineError as exc:
                row.statuses[lab.id] = SummaryStatus.NOT_APPLICABLE
                row.notes[lab.id] = str(exc)
                continue
            row.statuses[lab.id] = result.status.value
        rows.append(row)
    return FederationSummary(evaluated_at=evaluated_at, rows=rows)


def metric_series(catalog: Catalog, store, lab_id: str, kpi_id: str, metric_id: str,
                  start: datetime, end: datetime, step: Duration) -> list[SeriesPoint]:
    """The metric sampled at start + k*step <= end, each sample evaluated
    over the KPI's window ending at that instant. Insufficient samples
    are omitted, not fabricated."""
    from .engine import _resolve  # shared resolution/scope checks

    kpi = _resolve(catalog, kpi_id, lab_id)
    metric = kpi.metric(metric_id)
    if metric is None:
        raise EngineError(f"kpi {kpi_id!r} has no metric {metric_id!r}")
    if end < start:
        raise ValueError("series end precedes start")

    points: list[SeriesPoint] = []
    k = 0
    while True:
        instant = add_duration(start, step, times=k)
        if instant > end:
            break
        window_start = subtract_duration(instant, kpi.window)

        def lookup(measure_id: str, s: datetime, e: datetime):
            return store.select(lab_id, measure_id, s, e)

        value = eval_expression(metric.expression, lookup, window_start, instant)
        if value is not INSUFFICIENT_DATA:
            points.append(SeriesPoint(timestamp=instant, value=value))  # type: ignore[arg-type]
        k += 1
    return points


def tradeoffs(catalog: Catalog, store, lab_id: str,
              selection: list[tuple[str, str]],
              start: datetime, end: datetime, step: Duration,
              flag_threshold: float = TRADEOFF_FLAG_THRESHOLD) -> TradeoffMatrix:
    """Pairwise correlation of metric trajectories within one lab.

    Series are aligned on the instants where every selected metric has a
    value; missing samples drop the instant rather than interpolating.
    Pairs at or below the flag threshold come back as candidate
    trade-offs. Correlation does not imply causation; the flags are
    prompts for human judgement.
    """
    if len(selection) < 2:
        raise ValueError("trade-off analysis needs at least two metrics")

    series: list[dict[datetime, float]] = []
    for kpi_id, metric_id in selection:
        points = metric_series(catalog, store, lab_id, kpi_id, metric_id, start, end, step)
        series.append({p.timestamp: p.value for p in points})

    shared = set(series[0])
    for s in series[1:]:
        shared &= set(s)
    instants = sorted(shared)
    vectors = [[s[t] for t in instants] for s in series]

    n = len(selection)
    matrix: list[list[float | None]] = [[None] * n for _ in range(n)]
    flags: list[TradeoffFlag] = []
    for i in range(n):
        matrix[i][i] = None if pearson(vectors[i], vectors[i]) is None else 1.0
        for j in range(i + 1, n):
            r = pearson(vectors[i], vectors[j])
            matrix[i][j] = r
            matrix[j][i] = r
            if r is not None and r <= flag_threshold:
                flags.append(TradeoffFlag(first=selection[i], second=selection[j], r=r))
    return TradeoffMatrix(lab_id=lab_id, window_start=start, window_end=end,
                          sample_step=step, metric_ids=list(selection), r=matrix, flags=flags)
