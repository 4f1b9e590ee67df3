"""Canonical text form of a catalog.

serialize_catalog is the inverse of parse_catalog up to whitespace and
comments: re-parsing the output yields a structurally equal Catalog. The
catalog must be valid first (ids are identifiers, numbers finite), or
the emitted text may not survive the trip.
"""

from __future__ import annotations

from ..model import (
    Aggregate,
    Binary,
    Catalog,
    ExpressionNode,
    KpiDefinition,
    Literal,
    MeasureDefinition,
    Negate,
    ReportTemplate,
    TargetSpec,
    ValueType,
)

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _quote(text: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(ch, ch) for ch in text) + '"'


def _number(value: float) -> str:
    # repr of a float is the shortest digit string that parses back exactly.
    return repr(float(value))


def _strlist(items) -> str:
    return "[" + ", ".join(_quote(s) for s in items) + "]"


# Binary precedence levels; atoms sit above both.
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_ATOM = 3


def serialize_expression(expr: ExpressionNode) -> str:
    return _expr(expr, 1)


def _expr(node: ExpressionNode, min_prec: int) -> str:
    if isinstance(node, Literal):
        return _number(node.value)
    if isinstance(node, Aggregate):
        if node.window_override is not None:
            return f"{node.fn.value}({node.measure_id}, window={node.window_override})"
        return f"{node.fn.value}({node.measure_id})"
    if isinstance(node, Negate):
        # Parenthesised so the minus stays structural negation and is not
        # folded into a numeric literal on re-parse.
        return f"-({_expr(node.child, 1)})"
    if isinstance(node, Binary):
        prec = _PREC[node.op]
        # Parsing is left-associative, so the right child needs strictly
        # higher precedence to survive the round trip.
        text = f"{_expr(node.left, prec)} {node.op} {_expr(node.right, prec + 1)}"
        if prec < min_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {node!r}")


def _target(target: TargetSpec) -> str:
    preds = [f"{p.metric_id} {p.comparator} {_number(p.threshold)}" for p in target.predicates]
    if target.conjunctive:
        return "all(" + ", ".join(preds) + ")"
    return preds[0]


def _measure_block(m: MeasureDefinition) -> list[str]:
    type_part = m.value_type.value
    if m.value_type is ValueType.CATEGORY:
        type_part += " " + _strlist(m.category_values or [])
    scope_part = "common" if m.scope.kind == "common" else f"specific({', '.join(m.scope.lab_ids)})"
    return [
        f"measure {m.id} {{",
        f"  name: {_quote(m.name)}",
        f"  unit: {_quote(m.unit)}",
        f"  type: {type_part}",
        f"  frequency: {m.frequency.value}",
        f"  scope: {scope_part}",
        "}",
    ]


def _report_block(r: ReportTemplate) -> list[str]:
    return [
        f"report {r.id} {{",
        f"  name: {_quote(r.name)}",
        f"  measures: {', '.join(r.measure_ids)}",
        "}",
    ]


def _kpi_block(k: KpiDefinition) -> list[str]:
    lines = [
        f"kpi {k.id} {{",
        f"  name: {_quote(k.name)}",
        f"  dimension: {k.dimension.value}",
        f"  created_by: {_quote(k.created_by)}",
        f"  goal: {_quote(k.goal)}",
        f"  csf: {_quote(k.csf)}",
    ]
    for metric in k.metrics:
        lines.append(f"  metric {metric.id} = {serialize_expression(metric.expression)}")
    lines.append(f"  target: {_target(k.target)}")
    for action in k.actions:
        lines.append(f"  action {_quote(action.description)}")
    lines.append(f"  monitor: {k.monitor_frequency.value}")
    lines.append(f"  window: {k.window}")
    lines.append("}")
    return lines


def serialize_catalog(catalog: Catalog) -> str:
    blocks: list[list[str]] = []
    if catalog.protocol_notes is not None:
        blocks.append([f"protocol {_quote(catalog.protocol_notes)}"])
    for lab in catalog.labs:
        lines = [
            f"lab {lab.id} {{",
            f"  city: {_quote(lab.city)}",
            f"  country: {_quote(lab.country)}",
            f"  groups: {_strlist(lab.target_groups)}",
        ]
        if lab.description:
            lines.append(f"  description: {_quote(lab.description)}")
        lines.append("}")
        blocks.append(lines)
    blocks.extend(_measure_block(m) for m in catalog.measures)
    blocks.extend(_report_block(r) for r in catalog.reports)
    blocks.extend(_kpi_block(k) for k in catalog.kpis)
    if not blocks:
        return ""
    return "\n\n".join("\n".join(lines) for lines in blocks) + "\n"
