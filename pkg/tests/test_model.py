import random

from feedkit.model import (
    ActionSpec,
    AggFn,
    Aggregate,
    Binary,
    Catalog,
    CollectionFrequency,
    Dimension,
    Duration,
    KpiDefinition,
    LabProfile,
    Literal,
    MeasureDefinition,
    MetricDefinition,
    Predicate,
    Scope,
    TargetSpec,
    ValueType,
    expression_depth,
    validate_catalog,
)

from genutil import random_catalog


def _lab(lab_id="drama", groups=("women",)):
    return LabProfile(id=lab_id, city="Drama", country="Greece", target_groups=list(groups))


def _measure(mid="m1", value_type=ValueType.NUMBER, scope=None, categories=None):
    return MeasureDefinition(id=mid, name="M", unit="kg", value_type=value_type,
                             frequency=CollectionFrequency.DAILY,
                             scope=scope or Scope.common(), category_values=categories)


def _kpi(kpi_id="K1", metrics=None, target=None, actions=None):
    metrics = metrics if metrics is not None else [
        MetricDefinition(id="x1", expression=Aggregate(fn=AggFn.SUM, measure_id="m1"))]
    target = target or TargetSpec.single(Predicate("x1", ">=", 1.0))
    return KpiDefinition(
        id=kpi_id, name="K", dimension=Dimension.ECONOMIC, created_by="CKLH",
        goal="g", csf="c", metrics=metrics, target=target,
        actions=actions if actions is not None else [ActionSpec("do something")],
        monitor_frequency=CollectionFrequency.MONTHLY, window=Duration(1, "m"))


def _catalog(**kwargs):
    base = dict(labs=[_lab()], measures=[_measure()], reports=[], kpis=[_kpi()])
    base.update(kwargs)
    return Catalog(**base)


def test_valid_catalog_has_no_errors():
    assert validate_catalog(_catalog()) == []


def test_unresolved_metric_ref_carries_both_ids():
    kpi = _kpi(target=TargetSpec.single(Predicate("m9", ">=", 1.0)))
    errors = validate_catalog(_catalog(kpis=[kpi]))
    assert [e.code for e in errors] == ["unresolved_metric_ref"]
    assert errors[0].subject_id == "m9"
    assert "K1" in errors[0].message


def test_duplicate_measure_id():
    errors = validate_catalog(_catalog(measures=[_measure(), _measure()]))
    assert "duplicate_id" in [e.code for e in errors]


def test_sample_catalog_is_clean(sample_catalog):
    assert validate_catalog(sample_catalog) == []


def test_lab_id_pattern_enforced():
    errors = validate_catalog(_catalog(labs=[_lab(lab_id="Drama")]))
    assert "bad_lab_id" in [e.code for e in errors]


def test_empty_target_groups_flagged():
    errors = validate_catalog(_catalog(labs=[_lab(groups=())]))
    assert [e.code for e in errors] == ["empty_target_groups"]


def test_category_values_required_iff_category():
    missing = _measure(value_type=ValueType.CATEGORY)
    errors = validate_catalog(_catalog(measures=[missing]))
    assert "category_values_missing" in [e.code for e in errors]

    unexpected = _measure(value_type=ValueType.NUMBER, categories=["a"])
    errors = validate_catalog(_catalog(measures=[unexpected]))
    assert "category_values_unexpected" in [e.code for e in errors]

    dupes = _measure(value_type=ValueType.CATEGORY, categories=["a", "a"])
    errors = validate_catalog(_catalog(measures=[dupes]))
    assert "duplicate_category_value" in [e.code for e in errors]


def test_specific_scope_lab_refs_checked():
    measure = _measure(scope=Scope.specific(["nowhere"]))
    errors = validate_catalog(_catalog(measures=[measure]))
    assert "unresolved_lab_ref" in [e.code for e in errors]


def test_boolean_measure_only_counts():
    flag = _measure(mid="flag", value_type=ValueType.BOOLEAN)
    kpi = _kpi(metrics=[MetricDefinition(id="x1", expression=Aggregate(AggFn.AVG, "flag"))])
    errors = validate_catalog(_catalog(measures=[flag], kpis=[kpi]))
    assert "bad_aggregate_fn" in [e.code for e in errors]

    ok = _kpi(metrics=[MetricDefinition(id="x1", expression=Aggregate(AggFn.COUNT, "flag"))])
    assert validate_catalog(_catalog(measures=[flag], kpis=[ok])) == []


def test_conjunctive_needs_two_predicates():
    target = TargetSpec(conjunctive=True, predicates=(Predicate("x1", ">=", 1.0),))
    errors = validate_catalog(_catalog(kpis=[_kpi(target=target)]))
    assert "conjunctive_too_few" in [e.code for e in errors]


def test_empty_actions_and_metrics_flagged():
    errors = validate_catalog(_catalog(kpis=[_kpi(actions=[])]))
    assert "empty_actions" in [e.code for e in errors]
    kpi = _kpi(metrics=[], target=TargetSpec.single(Predicate("x1", ">=", 1.0)))
    errors = validate_catalog(_catalog(kpis=[kpi]))
    assert "empty_metrics" in [e.code for e in errors]


def test_expression_depth_bound():
    expr = Literal(1.0)
    for _ in range(40):
        expr = Binary("+", expr, Literal(1.0))
    assert expression_depth(expr) == 41
    kpi = _kpi(metrics=[MetricDefinition(id="x1", expression=expr)],
               target=TargetSpec.single(Predicate("x1", ">=", 0.0)))
    errors = validate_catalog(_catalog(kpis=[kpi]))
    assert "expression_too_deep" in [e.code for e in errors]


def test_non_finite_threshold_rejected():
    kpi = _kpi(target=TargetSpec.single(Predicate("x1", ">=", float("inf"))))
    errors = validate_catalog(_catalog(kpis=[kpi]))
    assert "non_finite_number" in [e.code for e in errors]


def test_validation_order_independent():
    rng = random.Random(7)
    for _ in range(25):
        catalog = random_catalog(rng)
        # Break it a little so there is something to report.
        if catalog.kpis:
            catalog.kpis[0].target = TargetSpec.single(Predicate("ghost", ">=", 1.0))
        baseline = sorted((e.code, e.kind, e.subject_id, e.message)
                          for e in validate_catalog(catalog))
        shuffled = Catalog(labs=list(catalog.labs), measures=list(catalog.measures),
                           reports=list(catalog.reports), kpis=list(catalog.kpis),
                           protocol_notes=catalog.protocol_notes)
        for bucket in (shuffled.labs, shuffled.measures, shuffled.reports, shuffled.kpis):
            rng.shuffle(bucket)
        assert sorted((e.code, e.kind, e.subject_id, e.message)
                      for e in validate_catalog(shuffled)) == baseline


def test_generated_catalogs_validate_clean():
    rng = random.Random(11)
    for _ in range(50):
        assert validate_catalog(random_catalog(rng)) == []


def test_applicable_labs_respects_scope(sample_catalog):
    ks1 = sample_catalog.kpi("KS1")
    assert sample_catalog.applicable_labs(ks1) == ["strovolos"]
    ka1 = sample_catalog.kpi("KA1")
    assert sample_catalog.applicable_labs(ka1) == ["bucharest", "drama", "strovolos"]
