"""Recursive-descent parser for `.kpi` catalog files.

Grammar (EBNF, also reproduced in docs/language.md):

    catalog   = { lab | measure | report | kpi | protocol } ;
    lab       = "lab" IDENT "{" "city:" STR "country:" STR "groups:" strlist
                [ "description:" STR ] "}" ;
    measure   = "measure" IDENT "{" "name:" STR "unit:" STR
                "type:" ("number"|"integer"|"boolean"|"category" strlist)
                "frequency:" FREQ "scope:" ("common" | "specific" "(" identlist ")") "}" ;
    report    = "report" IDENT "{" "name:" STR "measures:" identlist "}" ;
    kpi       = "kpi" IDENT "{" "name:" STR "dimension:" DIM "created_by:" STR
                "goal:" STR "csf:" STR { metric } "target:" target
                { "action" STR } "monitor:" FREQ "window:" DURATION "}" ;
    protocol  = "protocol" STR ;
    metric    = "metric" IDENT "=" expr ;
    expr      = term { ("+"|"-") term } ;
    term      = factor { ("*"|"/") factor } ;
    factor    = NUMBER | "-" factor | "(" expr ")"
              | AGG "(" IDENT [ "," "window" "=" DURATION ] ")" ;
    AGG       = "sum"|"avg"|"min"|"max"|"count"|"last" ;
    target    = "all" "(" pred { "," pred } ")" | pred ;
    pred      = IDENT CMP [ "-" ] NUMBER ;   CMP = ">="|">"|"<="|"<"|"==" ;
    strlist   = "[" [ STR { "," STR } ] "]" ;
    identlist = IDENT { "," IDENT } ;
    FREQ      = "daily"|"weekly"|"monthly"|"quarterly"|"per_event" ;
    DURATION  = INT ("d"|"w"|"m") ;
    DIM       = "economic"|"social"|"environmental"|"technical" ;

After an error inside a top-level block the parser skips ahead to the
next `lab`/`measure`/`report`/`kpi`/`protocol` keyword, so one pass
reports every broken block. Parsing is total: any byte soup yields a
(possibly empty) error list, never an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model import (
    ActionSpec,
    AggFn,
    Aggregate,
    Binary,
    Catalog,
    CollectionFrequency,
    Dimension,
    Duration,
    ExpressionNode,
    KpiDefinition,
    LabProfile,
    Literal,
    MeasureDefinition,
    MetricDefinition,
    Negate,
    Predicate,
    ReportTemplate,
    Scope,
    TargetSpec,
    ValueType,
)
from .lexer import CMP, DURATION, EOF, IDENT, NUMBER, PUNCT, STRING, Lexer, ParseError, SourceSpan, Token

TOP_KEYWORDS = ("lab", "measure", "report", "kpi", "protocol")
AGG_NAMES = tuple(f.value for f in AggFn)
FREQ_NAMES = tuple(f.value for f in CollectionFrequency)
DIM_NAMES = tuple(d.value for d in Dimension)

# Nesting bound for expressions; parenthesised towers beyond this are
# rejected instead of exhausting the interpreter stack. Each model-level
# nesting costs up to four grammar frames, so this comfortably admits
# every catalog within the model's depth-32 sanity bound.
MAX_PARSE_DEPTH = 200


@dataclass
class ParseResult:
    """Outcome of one parse pass: a catalog iff no errors were found.

    `spans` maps (kind, id) of each top-level block, and ("metric",
    f"{kpi_id}.{metric_id}") of each metric, to its declaration span so
    later validation and lint findings can point back into the source.
    """

    catalog: Catalog | None
    errors: list[ParseError]
    spans: dict[tuple[str, str], SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


class _Halt(Exception):
    """Internal signal: abandon the current block and resynchronize."""


class _Parser:
    def __init__(self, tokens: list[Token], errors: list[ParseError], filename: str):
        self.tokens = tokens
        self.errors = errors
        self.filename = filename
        self.pos = 0
        self.spans: dict[tuple[str, str], SourceSpan] = {}

    # --- token plumbing ---

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not EOF:
            self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == PUNCT and tok.text == text

    def at_ident(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == IDENT and (not names or tok.text in names)

    def fail(self, code: str, message: str, expected: tuple[str, ...] = ()) -> None:
        tok = self.peek()
        self.errors.append(ParseError(span=tok.span, code=code, message=message, expected=expected))
        raise _Halt()

    def expect_punct(self, text: str, what: str | None = None) -> Token:
        if not self.at_punct(text):
            what = what or text
            self.fail(f"expected_{_slug(what)}", f"expected {what!r}, found {_describe(self.peek())}",
                      expected=(text,))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.peek().kind != IDENT:
            self.fail(f"expected_{_slug(what)}", f"expected {what}, found {_describe(self.peek())}",
                      expected=("IDENT",))
        return self.advance()

    def expect_keyword(self, name: str) -> Token:
        if not self.at_ident(name):
            self.fail(f"expected_{_slug(name)}", f"expected keyword {name!r}, found {_describe(self.peek())}",
                      expected=(name,))
        return self.advance()

    def expect_string(self, what: str = "string") -> str:
        if self.peek().kind != STRING:
            self.fail("expected_string", f"expected a quoted {what}, found {_describe(self.peek())}",
                      expected=("STRING",))
        return self.advance().value  # type: ignore[return-value]

    def expect_number(self) -> float:
        if self.peek().kind != NUMBER:
            self.fail("expected_number", f"expected a number, found {_describe(self.peek())}",
                      expected=("NUMBER",))
        return self.advance().value  # type: ignore[return-value]

    def expect_duration(self) -> Duration:
        if self.peek().kind != DURATION:
            self.fail("expected_duration", f"expected a duration like 30d, found {_describe(self.peek())}",
                      expected=("DURATION",))
        count, unit = self.advance().value  # type: ignore[misc]
        return Duration(count=count, unit=unit)

    def expect_field(self, name: str) -> None:
        self.expect_keyword(name)
        self.expect_punct(":", f"{name}:")

    # --- catalog ---

    def parse_catalog(self) -> Catalog:
        catalog = Catalog()
        protocol_span: SourceSpan | None = None
        while self.peek().kind is not EOF:
            tok = self.peek()
            try:
                if self.at_ident("lab"):
                    catalog.labs.append(self.parse_lab())
                elif self.at_ident("measure"):
                    catalog.measures.append(self.parse_measure())
                elif self.at_ident("report"):
                    catalog.reports.append(self.parse_report())
                elif self.at_ident("kpi"):
                    catalog.kpis.append(self.parse_kpi())
                elif self.at_ident("protocol"):
                    self.advance()
                    if protocol_span is not None:
                        self.errors.append(ParseError(
                            span=tok.span, code="duplicate_protocol",
                            message="protocol notes declared twice"))
                    protocol_span = tok.span
                    catalog.protocol_notes = self.expect_string("protocol note")
                else:
                    self.fail("expected_block",
                              f"expected a top-level block ({', '.join(TOP_KEYWORDS)}), "
                              f"found {_describe(tok)}",
                              expected=TOP_KEYWORDS)
            except _Halt:
                self.recover()
        self.check_duplicates(catalog)
        return catalog

    def recover(self) -> None:
        """Skip to the next plausible top-level keyword (always progresses)."""
        self.advance()
        while self.peek().kind is not EOF and not self.at_ident(*TOP_KEYWORDS):
            self.advance()

    def check_duplicates(self, catalog: Catalog) -> None:
        for kind, items in (("lab", catalog.labs), ("measure", catalog.measures),
                            ("report", catalog.reports), ("kpi", catalog.kpis)):
            seen: set[str] = set()
            for item in items:
                if item.id in seen:
                    span = self.spans.get((kind + "!dup", item.id)) or self.spans[(kind, item.id)]
                    self.errors.append(ParseError(
                        span=span, code="duplicate_id",
                        message=f"duplicate {kind} id {item.id!r}"))
                seen.add(item.id)

    def record_span(self, kind: str, ident: str, span: SourceSpan) -> None:
        if (kind, ident) in self.spans:
            # Remember where the later duplicate sits so the error points at it.
            self.spans[(kind + "!dup", ident)] = span
        else:
            self.spans[(kind, ident)] = span

    # --- blocks ---

    def parse_lab(self) -> LabProfile:
        self.advance()  # lab
        name_tok = self.expect_ident("lab id")
        self.record_span("lab", name_tok.text, name_tok.span)
        self.expect_punct("{")
        self.expect_field("city")
        city = self.expect_string("city")
        self.expect_field("country")
        country = self.expect_string("country")
        self.expect_field("groups")
        groups = self.parse_strlist()
        description = ""
        if self.at_ident("description"):
            self.expect_field("description")
            description = self.expect_string("description")
        self.expect_punct("}")
        return LabProfile(id=name_tok.text, city=city, country=country,
                          target_groups=groups, description=description)

    def parse_measure(self) -> MeasureDefinition:
        self.advance()  # measure
        name_tok = self.expect_ident("measure id")
        self.record_span("measure", name_tok.text, name_tok.span)
        self.expect_punct("{")
        self.expect_field("name")
        name = self.expect_string("name")
        self.expect_field("unit")
        unit = self.expect_string("unit")
        self.expect_field("type")
        type_tok = self.peek()
        if type_tok.kind != IDENT or type_tok.text not in tuple(v.value for v in ValueType):
            self.fail("expected_value_type",
                      f"expected one of number, integer, boolean, category; found {_describe(type_tok)}",
                      expected=tuple(v.value for v in ValueType))
        self.advance()
        value_type = ValueType(type_tok.text)
        category_values: list[str] | None = None
        if value_type is ValueType.CATEGORY:
            category_values = self.parse_strlist()
        self.expect_field("frequency")
        frequency = self.parse_frequency()
        self.expect_field("scope")
        scope = self.parse_scope()
        self.expect_punct("}")
        return MeasureDefinition(id=name_tok.text, name=name, unit=unit, value_type=value_type,
                                 frequency=frequency, scope=scope, category_values=category_values)

    def parse_scope(self) -> Scope:
        if self.at_ident("common"):
            self.advance()
            return Scope.common()
        if self.at_ident("specific"):
            self.advance()
            self.expect_punct("(")
            labs = self.parse_identlist("lab id")
            self.expect_punct(")")
            return Scope.specific(labs)
        self.fail("expected_scope",
                  f"expected 'common' or 'specific(...)', found {_describe(self.peek())}",
                  expected=("common", "specific"))
        raise AssertionError("unreachable")

    def parse_frequency(self) -> CollectionFrequency:
        tok = self.peek()
        if tok.kind != IDENT or tok.text not in FREQ_NAMES:
            self.fail("expected_frequency",
                      f"expected one of {', '.join(FREQ_NAMES)}; found {_describe(tok)}",
                      expected=FREQ_NAMES)
        self.advance()
        return CollectionFrequency(tok.text)

    def parse_report(self) -> ReportTemplate:
        self.advance()  # report
        name_tok = self.expect_ident("report id")
        self.record_span("report", name_tok.text, name_tok.span)
        self.expect_punct("{")
        self.expect_field("name")
        name = self.expect_string("name")
        self.expect_field("measures")
        measures = self.parse_identlist("measure id")
        self.expect_punct("}")
        return ReportTemplate(id=name_tok.text, name=name, measure_ids=measures)

    def parse_kpi(self) -> KpiDefinition:
        self.advance()  # kpi
        name_tok = self.expect_ident("kpi id")
        kpi_id = name_tok.text
        self.record_span("kpi", kpi_id, name_tok.span)
        self.expect_punct("{")
        self.expect_field("name")
        name = self.expect_string("name")
        self.expect_field("dimension")
        dim_tok = self.peek()
        if dim_tok.kind != IDENT or dim_tok.text not in DIM_NAMES:
            self.fail("expected_dimension",
                      f"expected one of {', '.join(DIM_NAMES)}; found {_describe(dim_tok)}",
                      expected=DIM_NAMES)
        self.advance()
        self.expect_field("created_by")
        created_by = self.expect_string("created_by")
        self.expect_field("goal")
        goal = self.expect_string("goal")
        self.expect_field("csf")
        csf = self.expect_string("csf")

        metrics: list[MetricDefinition] = []
        metric_ids: set[str] = set()
        while self.at_ident("metric"):
            self.advance()
            metric_tok = self.expect_ident("metric id")
            self.record_span("metric", f"{kpi_id}.{metric_tok.text}", metric_tok.span)
            if metric_tok.text in metric_ids:
                self.errors.append(ParseError(
                    span=metric_tok.span, code="duplicate_id",
                    message=f"duplicate metric id {metric_tok.text!r} in kpi {kpi_id!r}"))
            metric_ids.add(metric_tok.text)
            self.expect_punct("=")
            expr = self.parse_expr(0)
            metrics.append(MetricDefinition(id=metric_tok.text, expression=expr))

        self.expect_field("target")
        target = self.parse_target()

        actions: list[ActionSpec] = []
        while self.at_ident("action"):
            self.advance()
            actions.append(ActionSpec(description=self.expect_string("action description")))

        self.expect_field("monitor")
        monitor = self.parse_frequency()
        self.expect_field("window")
        window = self.expect_duration()
        self.expect_punct("}")
        return KpiDefinition(id=kpi_id, name=name, dimension=Dimension(dim_tok.text),
                             created_by=created_by, goal=goal, csf=csf, metrics=metrics,
                             target=target, actions=actions, monitor_frequency=monitor,
                             window=window)

    # --- targets and expressions ---

    def parse_target(self) -> TargetSpec:
        if self.at_ident("all"):
            self.advance()
            self.expect_punct("(")
            predicates = [self.parse_predicate()]
            while self.at_punct(","):
                self.advance()
                predicates.append(self.parse_predicate())
            self.expect_punct(")")
            return TargetSpec.all_of(predicates)
        return TargetSpec.single(self.parse_predicate())

    def parse_predicate(self) -> Predicate:
        metric_tok = self.expect_ident("metric id")
        cmp_tok = self.peek()
        if cmp_tok.kind != CMP:
            self.fail("expected_comparator",
                      f"expected one of >=, >, <=, <, ==; found {_describe(cmp_tok)}",
                      expected=(">=", ">", "<=", "<", "=="))
        self.advance()
        negative = False
        if self.at_punct("-"):
            self.advance()
            negative = True
        value = self.expect_number()
        return Predicate(metric_id=metric_tok.text, comparator=cmp_tok.text,
                         threshold=-value if negative else value)

    def parse_expr(self, depth: int) -> ExpressionNode:
        if depth > MAX_PARSE_DEPTH:
            self.fail("expression_too_deep", f"expression nesting exceeds {MAX_PARSE_DEPTH}")
        node = self.parse_term(depth + 1)
        while self.at_punct("+") or self.at_punct("-"):
            op = self.advance().text
            right = self.parse_term(depth + 1)
            node = Binary(op=op, left=node, right=right)
        return node

    def parse_term(self, depth: int) -> ExpressionNode:
        if depth > MAX_PARSE_DEPTH:
            self.fail("expression_too_deep", f"expression nesting exceeds {MAX_PARSE_DEPTH}")
        node = self.parse_factor(depth + 1)
        while self.at_punct("*") or self.at_punct("/"):
            op = self.advance().text
            right = self.parse_factor(depth + 1)
            node = Binary(op=op, left=node, right=right)
        return node

    def parse_factor(self, depth: int) -> ExpressionNode:
        if depth > MAX_PARSE_DEPTH:
            self.fail("expression_too_deep", f"expression nesting exceeds {MAX_PARSE_DEPTH}")
        tok = self.peek()
        if tok.kind == NUMBER:
            self.advance()
            return Literal(value=tok.value)  # type: ignore[arg-type]
        if self.at_punct("-"):
            self.advance()
            # A minus glued onto a bare number is a negative literal; anything
            # else is structural negation. Keeps serialization invertible.
            if self.peek().kind == NUMBER:
                return Literal(value=-self.advance().value)  # type: ignore[operator]
            return Negate(child=self.parse_factor(depth + 1))
        if self.at_punct("("):
            self.advance()
            node = self.parse_expr(depth + 1)
            self.expect_punct(")")
            return node
        if tok.kind == IDENT and tok.text in AGG_NAMES:
            self.advance()
            fn = AggFn(tok.text)
            self.expect_punct("(")
            measure_tok = self.expect_ident("measure id")
            override: Duration | None = None
            if self.at_punct(","):
                self.advance()
                self.expect_keyword("window")
                self.expect_punct("=")
                override = self.expect_duration()
            self.expect_punct(")")
            return Aggregate(fn=fn, measure_id=measure_tok.text, window_override=override)
        self.fail("expected_expression",
                  f"expected a number, aggregate call or parenthesised expression; "
                  f"found {_describe(tok)}",
                  expected=("NUMBER", "(", "-") + AGG_NAMES)
        raise AssertionError("unreachable")

    # --- lists ---

    def parse_strlist(self) -> list[str]:
        self.expect_punct("[")
        items: list[str] = []
        if self.peek().kind == STRING:
            items.append(self.advance().value)  # type: ignore[arg-type]
            while self.at_punct(","):
                self.advance()
                items.append(self.expect_string("list item"))
        self.expect_punct("]")
        return items

    def parse_identlist(self, what: str) -> list[str]:
        items = [self.expect_ident(what).text]
        while self.at_punct(","):
            self.advance()
            items.append(self.expect_ident(what).text)
        return items


def parse_catalog(source: str, filename: str = "<catalog>") -> ParseResult:
    """Parse catalog text. Returns a catalog iff no errors were found.

    Never raises on any input; all problems come back as ParseErrors with
    spans inside the source text.
    """
    lexer = Lexer(source, filename)
    tokens = lexer.tokens()
    errors = list(lexer.errors)
    parser = _Parser(tokens, errors, filename)
    catalog = parser.parse_catalog()
    if errors:
        return ParseResult(catalog=None, errors=errors, spans=parser.spans)
    return ParseResult(catalog=catalog, errors=[], spans=parser.spans)


def _describe(tok: Token) -> str:
    if tok.kind is EOF:
        return "end of input"
    return f"{tok.kind} {tok.text!r}"


_PUNCT_NAMES = {
    "{": "lbrace", "}": "rbrace", "(": "lparen", ")": "rparen",
    "[": "lbracket", "]": "rbracket", ":": "colon", ",": "comma", "=": "equals",
}


def _slug(text: str) -> str:
    text = text.strip().rstrip(":") or text.strip()
    if text in _PUNCT_NAMES:
        return _PUNCT_NAMES[text]
    out = "".join(ch if ch.isalnum() else "_" for ch in text)
    return out or "token"
