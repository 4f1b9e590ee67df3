"""The `.kpi` catalog language: parser, serializer, and lint."""

from .lexer import ParseError, SourceSpan
from .lint import LintFinding, lint_catalog
from .parser import ParseResult, parse_catalog
from .serializer import serialize_catalog, serialize_expression

__all__ = [
    "ParseError",
    "ParseResult",
    "SourceSpan",
    "LintFinding",
    "lint_catalog",
    "parse_catalog",
    "serialize_catalog",
    "serialize_expression",
]
