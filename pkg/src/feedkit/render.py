"""JSON-able dict views of the domain types.

The wire format mirrors the domain types field-for-field; these builders
are the single source of truth for it (the HTTP API, the evaluation
audit log, and the CLI all render through here).
"""

from __future__ import annotations

from .model import (
    INSUFFICIENT_DATA,
    Catalog,
    EvaluationResult,
    KpiDefinition,
    MeasureDefinition,
    MetricValue,
    SeriesPoint,
)
from .dsl.serializer import serialize_expression
from .timeutil import format_utc


def metric_value_json(value: MetricValue) -> dict:
    if value is INSUFFICIENT_DATA:
        return {"status": "insufficient_data"}
    return {"value": value}


def evaluation_result_json(result: EvaluationResult) -> dict:
    return {
        "kpi_id": result.kpi_id,
        "lab_id": result.lab_id,
        "evaluated_at": format_utc(result.evaluated_at),
        "window_start": format_utc(result.window_start),
        "window_end": format_utc(result.window_end),
        "metric_values": {mid: metric_value_json(v) for mid, v in result.metric_values.items()},
        "status": result.status.value,
        "predicate_outcomes": {mid: o.value for mid, o in result.predicate_outcomes.items()},
        "triggered_actions": [{"description": a.description} for a in result.triggered_actions],
    }


def series_json(points: list[SeriesPoint]) -> dict:
    return {"points": [{"timestamp": format_utc(p.timestamp), "value": p.value} for p in points]}


def status_series_json(points) -> dict:
    return {"points": [{"timestamp": format_utc(ts), "status": status.value}
                       for ts, status in points]}


def measure_json(measure: MeasureDefinition) -> dict:
    out = {
        "id": measure.id,
        "name": measure.name,
        "unit": measure.unit,
        "value_type": measure.value_type.value,
        "frequency": measure.frequency.value,
        "scope": {"kind": measure.scope.kind},
    }
    if measure.scope.kind == "specific":
        out["scope"]["lab_ids"] = list(measure.scope.lab_ids)
    if measure.category_values is not None:
        out["category_values"] = list(measure.category_values)
    return out


def kpi_json(kpi: KpiDefinition) -> dict:
    return {
        "id": kpi.id,
        "name": kpi.name,
        "dimension": kpi.dimension.value,
        "created_by": kpi.created_by,
        "goal": kpi.goal,
        "csf": kpi.csf,
        "metrics": [{"id": m.id, "expression": serialize_expression(m.expression)}
                    for m in kpi.metrics],
        "target": {
            "conjunctive": kpi.target.conjunctive,
            "predicates": [{"metric_id": p.metric_id,
                            "comparator": p.comparator,
                            "threshold": p.threshold}
                           for p in kpi.target.predicates],
        },
        "actions": [{"description": a.description} for a in kpi.actions],
        "monitor_frequency": kpi.monitor_frequency.value,
        "window": str(kpi.window),
    }


def catalog_json(catalog: Catalog) -> dict:
    return {
        "labs": [{"id": lab.id, "city": lab.city, "country": lab.country,
                  "target_groups": list(lab.target_groups),
                  "description": lab.description}
                 for lab in catalog.labs],
        "measures": [measure_json(m) for m in catalog.measures],
        "reports": [{"id": r.id, "name": r.name, "measure_ids": list(r.measure_ids)}
                    for r in catalog.reports],
        "kpis": [kpi_json(k) for k in catalog.kpis],
        "protocol_notes": catalog.protocol_notes,
    }
