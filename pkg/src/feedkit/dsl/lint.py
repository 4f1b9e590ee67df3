"""Catalog lint: design pitfalls that are legal but suspect.

Two pitfalls recur when teams draft KPIs: scoping an indicator so broadly
that no single site can collect its inputs, and packing too many
sub-indicators into one KPI. The rules here flag both, plus protocol
hygiene issues (declared-but-unused common measures, metrics that the
target never reads).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import Catalog, expression_measure_ids
from .lexer import SourceSpan

#: More metrics than this in one KPI suggests it should be split. Four is
#: the most any well-formed composite indicator in the shipped catalog
#: needs (soil health and training effectiveness both use four).
MAX_METRICS_PER_KPI = 4

#: A KPI whose metrics touch more distinct measures than this is likely
#: bundling several concerns that deserve their own KPIs.
MIXED_SCOPE_MEASURE_HINT = 6

RULES = ("too_many_metrics", "mixed_dimensions_hint", "unreferenced_metric",
         "unmeasurable_scope", "missing_common_usage")

_FALLBACK_SPAN = SourceSpan(file="<catalog>", line=1, column=1, length=0)


@dataclass(frozen=True)
class LintFinding:
    rule: str
    severity: str  # "warning" or "info"
    subject_id: str
    span: SourceSpan
    message: str

    def render(self) -> str:
        return (f"{self.span.file}:{self.span.line}:{self.span.column} "
                f"{self.rule} {self.message}")


def lint_catalog(catalog: Catalog,
                 spans: dict[tuple[str, str], SourceSpan] | None = None) -> list[LintFinding]:
    """Deterministic findings for a catalog that already validates clean."""
    spans = spans or {}
    findings: list[LintFinding] = []

    def span_of(kind: str, ident: str) -> SourceSpan:
        return spans.get((kind, ident), _FALLBACK_SPAN)

    for kpi in catalog.kpis:
        if len(kpi.metrics) > MAX_METRICS_PER_KPI:
            findings.append(LintFinding(
                rule="too_many_metrics", severity="warning", subject_id=kpi.id,
                span=span_of("kpi", kpi.id),
                message=f"kpi {kpi.id!r} declares {len(kpi.metrics)} metrics "
                        f"(more than {MAX_METRICS_PER_KPI}); consider splitting it"))

        targeted = {p.metric_id for p in kpi.target.predicates}
        for metric in kpi.metrics:
            if metric.id not in targeted:
                findings.append(LintFinding(
                    rule="unreferenced_metric", severity="warning", subject_id=metric.id,
                    span=span_of("metric", f"{kpi.id}.{metric.id}"),
                    message=f"metric {metric.id!r} of kpi {kpi.id!r} is never used by its target"))

        referenced = kpi.measure_ids()
        if referenced and catalog.labs and not catalog.applicable_labs(kpi):
            findings.append(LintFinding(
                rule="unmeasurable_scope", severity="warning", subject_id=kpi.id,
                span=span_of("kpi", kpi.id),
                message=f"no lab is in scope for every measure of kpi {kpi.id!r}; "
                        f"it can never be evaluated"))

        if len(referenced) > MIXED_SCOPE_MEASURE_HINT:
            findings.append(LintFinding(
                rule="mixed_dimensions_hint", severity="info", subject_id=kpi.id,
                span=span_of("kpi", kpi.id),
                message=f"kpi {kpi.id!r} draws on {len(referenced)} distinct measures; "
                        f"it may be bundling several indicators"))

    used: set[str] = set()
    for kpi in catalog.kpis:
        for metric in kpi.metrics:
            used.update(expression_measure_ids(metric.expression))
    for measure in catalog.measures:
        if measure.scope.kind == "common" and measure.id not in used:
            findings.append(LintFinding(
                rule="missing_common_usage", severity="info", subject_id=measure.id,
                span=span_of("measure", measure.id),
                message=f"common measure {measure.id!r} is collected by every lab "
                        f"but referenced by no kpi"))

    return findings
