"""Tokenizer for the `.kpi` catalog language.

Lexical errors never abort the scan: the bad stretch is reported and
skipped so the parser can keep producing diagnostics for the rest of the
file. Keywords are contextual; every word lexes as IDENT.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass

IDENT = "ident"
STRING = "string"
NUMBER = "number"
DURATION = "duration"
CMP = "cmp"
PUNCT = "punct"  # one of { } ( ) [ ] : , = + - * /
EOF = "eof"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int  # 1-based
    column: int  # 1-based
    length: int


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    code: str
    message: str
    expected: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.span.file}:{self.span.line}:{self.span.column} {self.code} {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object  # str for idents/strings, float for numbers, (count, unit) for durations
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<duration>[0-9]+[dwm]\b)
    | (?P<number>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"(?:[^"\\\n\r]|\\[^\n\r])*")
    | (?P<badstring>"(?:[^"\\\n\r]|\\[^\n\r])*\\?)
    | (?P<cmp><=|>=|==|<|>)
    | (?P<punct>[{}()\[\]:,=+\-*/])
    | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


class Lexer:
    def __init__(self, source: str, filename: str = "<catalog>"):
        self.source = source
        self.filename = filename
        self.errors: list[ParseError] = []
        # Offsets of line starts, for offset -> (line, column) lookups.
        self._line_starts = [0]
        for m in re.finditer("\n", source):
            self._line_starts.append(m.end())

    def _span(self, offset: int, length: int) -> SourceSpan:
        line_idx = bisect_right(self._line_starts, offset) - 1
        column = offset - self._line_starts[line_idx] + 1
        return SourceSpan(file=self.filename, line=line_idx + 1, column=column, length=length)

    def _error(self, offset: int, length: int, code: str, message: str) -> None:
        self.errors.append(ParseError(span=self._span(offset, length), code=code, message=message))

    def _unescape(self, raw: str, offset: int) -> str | None:
        """Decode the body of a quoted string; None on a bad escape."""
        if "\\" not in raw:
            return raw
        out: list[str] = []
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch == "\\":
                esc = raw[i + 1]  # grammar guarantees a following char
                decoded = _ESCAPES.get(esc)
                if decoded is None:
                    self._error(offset + i, 2, "bad_escape",
                                f"unknown escape sequence \\{esc}")
                    return None
                out.append(decoded)
                i += 2
            else:
                out.append(ch)
                i += 1
        return "".join(out)

    def tokens(self) -> list[Token]:
        toks: list[Token] = []
        for m in _TOKEN_RE.finditer(self.source):
            kind = m.lastgroup
            text = m.group()
            start = m.start()
            if kind in ("ws", "comment"):
                continue
            if kind == "duration":
                toks.append(Token(DURATION, text, (int(text[:-1]), text[-1]),
                                  self._span(start, len(text))))
            elif kind == "number":
                toks.append(Token(NUMBER, text, float(text), self._span(start, len(text))))
            elif kind == "ident":
                toks.append(Token(IDENT, text, text, self._span(start, len(text))))
            elif kind == "string":
                value = self._unescape(text[1:-1], start + 1)
                if value is not None:
                    toks.append(Token(STRING, text, value, self._span(start, len(text))))
            elif kind == "badstring":
                self._error(start, len(text), "unterminated_string", "unterminated string literal")
            elif kind == "cmp":
                toks.append(Token(CMP, text, text, self._span(start, len(text))))
            elif kind == "punct":
                toks.append(Token(PUNCT, text, text, self._span(start, len(text))))
            else:  # bad
                self._error(start, len(text), "unexpected_char",
                            f"unexpected character {text!r}")
        end = len(self.source)
        toks.append(Token(EOF, "", None, self._span(end, 0) if end else
                          SourceSpan(self.filename, 1, 1, 0)))
        return toks
