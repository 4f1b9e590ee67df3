import random

from feedkit.dsl import parse_catalog, serialize_catalog
from feedkit.dsl.parser import ParseResult
from feedkit.model import (
    Aggregate,
    AggFn,
    Binary,
    Dimension,
    Duration,
    Literal,
    Negate,
    ValueType,
    validate_catalog,
)

from genutil import random_catalog

MINIMAL = 'lab drama { city: "Drama" country: "Greece" groups: ["women"] }'


def test_minimal_lab_catalog():
    result = parse_catalog(MINIMAL)
    assert result.ok
    catalog = result.catalog
    assert len(catalog.labs) == 1 and not catalog.kpis
    lab = catalog.labs[0]
    assert (lab.id, lab.city, lab.country, lab.target_groups) == (
        "drama", "Drama", "Greece", ["women"])


def test_sample_catalog_shape(sample_text):
    result = parse_catalog(sample_text)
    assert result.ok
    catalog = result.catalog
    assert [k.id for k in catalog.kpis] == [
        "KA1", "KB1", "KB2", "KB3", "KC1", "KD1", "KD2", "KS1", "KS2", "KS3", "KS4"]
    assert len(catalog.labs) == 3
    assert catalog.protocol_notes


def test_malformed_predicate_span():
    source = ('kpi K1 { name: "n" dimension: social created_by: "x" goal: "g" csf: "c"\n'
              'metric m1 = sum(a)\n'
              'target: all(m1 >= )\n'
              'monitor: daily window: 7d }')
    result = parse_catalog(source, filename="t.kpi")
    assert not result.ok
    err = result.errors[0]
    assert err.code == "expected_number"
    assert err.span.file == "t.kpi"
    assert err.span.line == 3
    # points at the ')' that appeared where the number belonged
    assert source.splitlines()[2][err.span.column - 1] == ")"


def test_recovery_reports_multiple_errors():
    source = (
        'lab one { city: "A" }\n'          # missing country -> error 1
        'lab drama { city: "Drama" country: "Greece" groups: ["w"] }\n'
        'measure m1 { name: "n" }\n'        # missing unit -> error 2
        'measure ok { name: "n" unit: "u" type: number frequency: daily scope: common }\n'
    )
    result = parse_catalog(source)
    assert len(result.errors) == 2
    assert result.catalog is None


def test_duplicate_top_level_id_is_parse_error():
    source = MINIMAL + "\n" + MINIMAL
    result = parse_catalog(source)
    assert [e.code for e in result.errors] == ["duplicate_id"]
    assert result.errors[0].span.line == 2


def test_lexical_errors_do_not_stop_the_scan():
    result = parse_catalog('@@@ lab drama { city: "Drama" country: "Greece" groups: ["w"] } $$')
    codes = {e.code for e in result.errors}
    assert "unexpected_char" in codes


def test_unterminated_string():
    result = parse_catalog('lab drama { city: "Drama')
    assert any(e.code == "unterminated_string" for e in result.errors)


def test_crlf_accepted():
    result = parse_catalog(MINIMAL.replace(" ", " ").replace("{", "{\r\n"))
    assert result.ok


def test_expression_shapes():
    source = ('kpi K1 { name: "n" dimension: economic created_by: "x" goal: "g" csf: "c"\n'
              'metric m1 = sum(rev) - sum(exp)\n'
              'metric m2 = avg(a, window=30d) / count(b) + 2 * -3\n'
              'metric m3 = -(sum(a) + 1)\n'
              'target: all(m1 > 0, m2 >= -1.5, m3 < 4)\n'
              'action "act" monitor: monthly window: 1m }')
    result = parse_catalog(source)
    assert result.ok
    kpi = result.catalog.kpis[0]
    m1, m2, m3 = kpi.metrics
    assert m1.expression == Binary("-", Aggregate(AggFn.SUM, "rev"), Aggregate(AggFn.SUM, "exp"))
    assert m2.expression == Binary(
        "+",
        Binary("/", Aggregate(AggFn.AVG, "a", Duration(30, "d")), Aggregate(AggFn.COUNT, "b")),
        Binary("*", Literal(2.0), Literal(-3.0)))
    assert m3.expression == Negate(Binary("+", Aggregate(AggFn.SUM, "a"), Literal(1.0)))
    assert kpi.target.predicates[1].threshold == -1.5


def test_category_measure_and_scope():
    source = ('lab a { city: "c" country: "c" groups: ["g"] }\n'
              'measure q { name: "n" unit: "u" type: category ["lo", "hi"]\n'
              '  frequency: weekly scope: specific(a) }')
    result = parse_catalog(source)
    assert result.ok
    m = result.catalog.measures[0]
    assert m.value_type is ValueType.CATEGORY
    assert m.category_values == ["lo", "hi"]
    assert m.scope.kind == "specific" and m.scope.lab_ids == ("a",)


def test_string_escapes_round_trip():
    text = 'lab a { city: "line\\nbreak \\"q\\" tab\\t\\\\" country: "c" groups: ["g"] }'
    result = parse_catalog(text)
    assert result.ok
    assert result.catalog.labs[0].city == 'line\nbreak "q" tab\t\\'


def test_deep_parentheses_rejected_not_crashing():
    result = parse_catalog(
        'kpi K1 { name: "n" dimension: social created_by: "x" goal: "g" csf: "c"\n'
        "metric m1 = " + "(" * 500 + "1" + ")" * 500 + "\n"
        'target: m1 > 0 action "a" monitor: daily window: 7d }')
    assert not result.ok
    assert any(e.code == "expression_too_deep" for e in result.errors)


def test_serializer_emits_single_measure_block():
    source = 'measure m1 { name: "Rain" unit: "L" type: number frequency: daily scope: common }'
    catalog = parse_catalog(source).catalog
    text = serialize_catalog(catalog)
    assert text.count("measure m1 {") == 1
    for fragment in ('name: "Rain"', 'unit: "L"', "type: number",
                     "frequency: daily", "scope: common"):
        assert fragment in text


def test_serialize_empty_catalog_reparses_empty():
    from feedkit.model import Catalog

    text = serialize_catalog(Catalog())
    result = parse_catalog(text)
    assert result.ok and result.catalog == Catalog()


def test_sample_catalog_round_trip(sample_catalog):
    text = serialize_catalog(sample_catalog)
    result = parse_catalog(text)
    assert result.ok
    # field-by-field structural equality via dataclass equality
    assert result.catalog == sample_catalog


def test_spans_cover_blocks(sample_text):
    result = parse_catalog(sample_text, filename="feed4food.kpi")
    assert ("kpi", "KA1") in result.spans
    assert ("measure", "revenue_eur") in result.spans
    span = result.spans[("kpi", "KA1")]
    assert sample_text.splitlines()[span.line - 1][span.column - 1:].startswith("KA1")


def test_generated_catalogs_round_trip_fast():
    rng = random.Random(2026)
    for _ in range(150):
        catalog = random_catalog(rng)
        assert validate_catalog(catalog) == []
        text = serialize_catalog(catalog)
        result = parse_catalog(text)
        assert result.ok, [e.render() for e in result.errors] + [text]
        assert result.catalog == catalog
