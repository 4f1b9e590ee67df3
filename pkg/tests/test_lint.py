from feedkit.dsl import lint_catalog, parse_catalog
from feedkit.dsl.lint import MAX_METRICS_PER_KPI
from feedkit.model import (
    Aggregate,
    AggFn,
    Literal,
    MetricDefinition,
    Predicate,
    Scope,
    TargetSpec,
)

from test_model import _catalog, _kpi, _lab, _measure


def _metric(mid, measure="m1"):
    return MetricDefinition(id=mid, expression=Aggregate(AggFn.SUM, measure))


def rules(catalog, spans=None):
    return [f.rule for f in lint_catalog(catalog, spans)]


def test_five_metric_kpi_warns():
    # threshold derived by counting: the largest composite indicators in
    # the shipped catalog carry four metrics each, so five must warn
    assert MAX_METRICS_PER_KPI == 4
    metrics = [_metric(f"x{i}") for i in range(5)]
    target = TargetSpec.all_of([Predicate(f"x{i}", ">=", 0.0) for i in range(5)])
    catalog = _catalog(kpis=[_kpi(metrics=metrics, target=target)])
    assert "too_many_metrics" in rules(catalog)

    four = _catalog(kpis=[_kpi(metrics=metrics[:4],
                               target=TargetSpec.all_of(
                                   [Predicate(f"x{i}", ">=", 0.0) for i in range(4)]))])
    assert "too_many_metrics" not in rules(four)


def test_unreferenced_metric_warns():
    metrics = [_metric("x1"), _metric("x2")]
    catalog = _catalog(kpis=[_kpi(metrics=metrics)])  # target only uses x1
    findings = lint_catalog(catalog)
    assert [(f.rule, f.subject_id) for f in findings
            if f.rule == "unreferenced_metric"] == [("unreferenced_metric", "x2")]


def test_unmeasurable_scope_warns():
    # two labs, one measure each; a KPI needing both can run nowhere
    labs = [_lab("a"), _lab("b")]
    measures = [_measure("m1", scope=Scope.specific(["a"])),
                _measure("m2", scope=Scope.specific(["b"]))]
    metrics = [_metric("x1", "m1"), _metric("x2", "m2")]
    target = TargetSpec.all_of([Predicate("x1", ">=", 0.0), Predicate("x2", ">=", 0.0)])
    catalog = _catalog(labs=labs, measures=measures, kpis=[_kpi(metrics=metrics, target=target)])
    assert "unmeasurable_scope" in rules(catalog)


def test_missing_common_usage_info():
    unused = _measure("lonely")
    catalog = _catalog(measures=[_measure(), unused])
    findings = [f for f in lint_catalog(catalog) if f.rule == "missing_common_usage"]
    assert [f.subject_id for f in findings] == ["lonely"]
    assert all(f.severity == "info" for f in findings)


def test_mixed_dimensions_hint_on_broad_kpi():
    measures = [_measure(f"m{i}") for i in range(8)]
    metrics = [MetricDefinition(
        id="x1",
        expression=_sum_chain([m.id for m in measures]))]
    catalog = _catalog(measures=measures, kpis=[_kpi(metrics=metrics)])
    found = [f for f in lint_catalog(catalog) if f.rule == "mixed_dimensions_hint"]
    assert len(found) == 1 and found[0].severity == "info"


def _sum_chain(ids):
    from feedkit.model import Binary

    expr = Aggregate(AggFn.SUM, ids[0])
    for mid in ids[1:]:
        expr = Binary("+", expr, Aggregate(AggFn.SUM, mid))
    return expr


def test_literal_only_kpi_is_not_unmeasurable():
    catalog = _catalog(kpis=[_kpi(metrics=[MetricDefinition(id="x1", expression=Literal(1.0))])])
    assert "unmeasurable_scope" not in rules(catalog)


def test_sample_catalog_lints_clean(sample_catalog, sample_text):
    result = parse_catalog(sample_text, filename="feed4food.kpi")
    findings = lint_catalog(sample_catalog, result.spans)
    assert all(f.severity == "info" for f in findings)
    assert {f.rule for f in findings} == {"missing_common_usage"}
    # findings point into the real file via the span table
    assert all(f.span.file == "feed4food.kpi" and f.span.line > 1 for f in findings)


def test_findings_are_deterministic(sample_catalog):
    assert lint_catalog(sample_catalog) == lint_catalog(sample_catalog)
