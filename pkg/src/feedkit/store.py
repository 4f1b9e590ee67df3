"""File-backed, append-only observation store.

One tab-separated log file per lab holds every accepted observation in
ingestion order; replaying the logs rebuilds the in-memory index exactly,
so the log is the only source of truth and needs no database. Corrections
happen by convention through later observations: nothing is ever updated
or deleted, and exact duplicates are accepted on purpose (an audit trail
beats silent deduplication).

Record layout, UTF-8, one observation per line:

    ingested_at <TAB> timestamp <TAB> lab_id <TAB> measure_id <TAB> value
    <TAB> uploader_id <TAB> source

Free-text fields escape tab, newline, carriage return and backslash.
Evaluation results are persisted separately in ``evaluations.jsonl`` as
an audit history; queries recompute rather than read it back.
"""

from __future__ import annotations

import csv
import io
import json
import math
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Iterable

from . import render
from .model import (
    Catalog,
    CollectionFrequency,
    EvaluationResult,
    MeasureDefinition,
    Observation,
    SeriesPoint,
    Source,
    ValueType,
)
from .timeutil import bucket_label, bucket_labels, format_utc, parse_utc, utc_now

CSV_HEADER = ["measure_id", "timestamp", "value", "uploader_id"]

#: Observations may run ahead of the server clock by at most this much;
#: it absorbs clock skew between labs and the service.
FUTURE_SKEW_ALLOWANCE = timedelta(hours=24)


class StoreError(Exception):
    pass


class StoreUnavailable(StoreError):
    """The backing files cannot be read or written; nothing was persisted."""


class UnknownMeasure(StoreError):
    pass


class UnknownLab(StoreError):
    pass


class UnknownReportTemplate(StoreError):
    pass


class CategoryNotPlottable(StoreError):
    """Category measures have no numeric axis and cannot be series-queried."""


class MalformedHeader(StoreError):
    """The CSV header does not match the documented import format."""


@dataclass(frozen=True)
class Rejection:
    locator: str  # row number for file imports, measure/field id otherwise
    code: str
    message: str


@dataclass
class IngestOutcome:
    accepted: int = 0
    rejected: list[Rejection] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.rejected


@dataclass
class ReportSubmission:
    report_id: str
    lab_id: str
    timestamp: datetime
    values: dict[str, float | int | bool | str]
    uploader_id: str


@dataclass(frozen=True)
class CoverageEntry:
    measure_id: str
    expected_buckets: int
    filled_buckets: int
    missing_buckets: list[str]


@dataclass
class CoverageReport:
    lab_id: str
    period_start: datetime
    period_end: datetime
    entries: list[CoverageEntry]


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out: list[str] = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            out.append(_UNESCAPES.get(text[i + 1], text[i + 1]))
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _encode_value(measure: MeasureDefinition, value: float | int | bool | str) -> str:
    if measure.value_type is ValueType.BOOLEAN:
        return "true" if value else "false"
    if measure.value_type is ValueType.CATEGORY:
        return _escape(str(value))
    if measure.value_type is ValueType.INTEGER:
        return str(int(value))
    return repr(float(value))


def _decode_value(measure: MeasureDefinition, text: str) -> float | int | bool | str:
    if measure.value_type is ValueType.BOOLEAN:
        return text == "true"
    if measure.value_type is ValueType.CATEGORY:
        return _unescape(text)
    if measure.value_type is ValueType.INTEGER:
        return int(text)
    return float(text)


class Store:
    """Observation log plus evaluation history under one directory.

    Writes to the same lab are serialized by a per-lab lock; reads take
    snapshots under a short global lock and never block other labs'
    writers for long.
    """

    def __init__(self, root: str | Path, catalog: Catalog,
                 clock: Callable[[], datetime] = utc_now):
        self.root = Path(root)
        self.catalog = catalog
        self.clock = clock
        try:
            self.root.mkdir(exist_ok=True)
        except OSError as exc:
            raise StoreUnavailable(f"cannot create store directory {self.root}: {exc}") from exc
        self._index: dict[tuple[str, str], list[tuple[datetime, datetime, int, Observation]]] = {}
        self._seq = 0
        self._files: dict[str, io.TextIOWrapper] = {}
        self._lab_locks: dict[str, threading.Lock] = {}
        self._mutex = threading.Lock()
        self._history: list[dict] = []
        self._replay()

    # --- lifecycle ---

    def close(self) -> None:
        with self._mutex:
            for handle in self._files.values():
                try:
                    handle.flush()
                    handle.close()
                except OSError:
                    pass
            self._files.clear()

    def __enter__(self) -> Store:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _lab_lock(self, lab_id: str) -> threading.Lock:
        with self._mutex:
            return self._lab_locks.setdefault(lab_id, threading.Lock())

    def _log_path(self, lab_id: str) -> Path:
        return self.root / f"{lab_id}.log"

    def _handle(self, lab_id: str) -> io.TextIOWrapper:
        handle = self._files.get(lab_id)
        if handle is None or handle.closed:
            try:
                handle = open(self._log_path(lab_id), "a", encoding="utf-8", newline="")
            except OSError as exc:
                raise StoreUnavailable(f"cannot open log for lab {lab_id!r}: {exc}") from exc
            self._files[lab_id] = handle
        return handle

    def _replay(self) -> None:
        for path in sorted(self.root.glob("*.log")):
            lab_id = path.stem
            try:
                lines = path.read_text(encoding="utf-8").splitlines()
            except OSError as exc:
                raise StoreUnavailable(f"cannot read log {path}: {exc}") from exc
            for n, line in enumerate(lines, start=1):
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 7:
                    raise StoreUnavailable(f"{path}:{n}: malformed record")
                ingested_at, timestamp, rec_lab, measure_id, raw_value, uploader, source = parts
                measure = self.catalog.measure(measure_id)
                if measure is None:
                    raise StoreUnavailable(
                        f"{path}:{n}: log references measure {measure_id!r} missing from the catalog")
                try:
                    obs = Observation(
                        measure_id=measure_id,
                        lab_id=rec_lab,
                        timestamp=parse_utc(timestamp),
                        value=_decode_value(measure, raw_value),
                        uploader_id=_unescape(uploader),
                        source=Source(source),
                        ingested_at=parse_utc(ingested_at),
                    )
                except (ValueError, KeyError) as exc:
                    raise StoreUnavailable(f"{path}:{n}: malformed record: {exc}") from exc
                self._insert(obs)
        history_path = self.root / "evaluations.jsonl"
        if history_path.exists():
            try:
                for line in history_path.read_text(encoding="utf-8").splitlines():
                    if line:
                        self._history.append(json.loads(line))
            except (OSError, json.JSONDecodeError) as exc:
                raise StoreUnavailable(f"cannot replay evaluation history: {exc}") from exc

    def _insert(self, obs: Observation) -> None:
        with self._mutex:
            self._seq += 1
            key = (obs.lab_id, obs.measure_id)
            self._index.setdefault(key, []).append(
                (obs.timestamp, obs.ingested_at, self._seq, obs))

    def _append_record(self, obs: Observation) -> None:
        measure = self.catalog.measure(obs.measure_id)
        assert measure is not None
        line = "\t".join([
            format_utc(obs.ingested_at),
            format_utc(obs.timestamp),
            obs.lab_id,
            obs.measure_id,
            _encode_value(measure, obs.value),
            _escape(obs.uploader_id),
            obs.source.value,
        ])
        with self._lab_lock(obs.lab_id):
            try:
                handle = self._handle(obs.lab_id)
                handle.write(line + "\n")
                handle.flush()
            except OSError as exc:
                raise StoreUnavailable(f"cannot append to log for lab {obs.lab_id!r}: {exc}") from exc
            self._insert(obs)

    # --- validation ---

    def _check_value(self, measure: MeasureDefinition,
                     value: float | int | bool | str) -> tuple[object, str, str]:
        """Returns (normalized_value, code, message); code is "" when fine."""
        vt = measure.value_type
        if vt is ValueType.BOOLEAN:
            if isinstance(value, bool):
                return value, "", ""
            return None, "type_mismatch", f"measure {measure.id!r} expects a boolean, got {value!r}"
        if vt is ValueType.CATEGORY:
            if isinstance(value, str):
                if value in (measure.category_values or []):
                    return value, "", ""
                return None, "category_not_allowed", (
                    f"{value!r} is not one of the declared categories of measure {measure.id!r}")
            return None, "type_mismatch", f"measure {measure.id!r} expects a category name, got {value!r}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None, "type_mismatch", f"measure {measure.id!r} expects a number, got {value!r}"
        if not math.isfinite(value):
            return None, "type_mismatch", f"measure {measure.id!r} expects a finite number"
        if vt is ValueType.INTEGER:
            if float(value).is_integer():
                return int(value), "", ""
            return None, "type_mismatch", f"measure {measure.id!r} expects a whole number, got {value!r}"
        return float(value), "", ""

    def _validate_candidate(self, lab_id: str, measure_id: str, timestamp: datetime,
                            value: float | int | bool | str,
                            now: datetime) -> tuple[Observation | None, Rejection | None]:
        locator = measure_id or "measure_id"
        if self.catalog.lab(lab_id) is None:
            return None, Rejection(locator, "unknown_lab", f"unknown lab {lab_id!r}")
        measure = self.catalog.measure(measure_id)
        if measure is None:
            return None, Rejection(locator, "unknown_measure", f"unknown measure {measure_id!r}")
        normalized, code, message = self._check_value(measure, value)
        if code:
            return None, Rejection(locator, code, message)
        if not measure.scope.includes(lab_id):
            return None, Rejection(locator, "out_of_scope",
                                   f"measure {measure_id!r} is not collected by lab {lab_id!r}")
        if timestamp > now + FUTURE_SKEW_ALLOWANCE:
            return None, Rejection(locator, "future_timestamp",
                                   f"timestamp {format_utc(timestamp)} is more than 24h in the future")
        obs = Observation(measure_id=measure_id, lab_id=lab_id, timestamp=timestamp,
                          value=normalized, uploader_id="", source=Source.FORM, ingested_at=now)
        return obs, None

    # --- ingestion ---

    def submit_observation(self, *, lab_id: str, measure_id: str, timestamp: datetime,
                           value: float | int | bool | str, uploader_id: str) -> IngestOutcome:
        """Single-measure form entry. Accepted data is durably appended."""
        now = self.clock()
        obs, rejection = self._validate_candidate(lab_id, measure_id, timestamp, value, now)
        if rejection is not None:
            return IngestOutcome(accepted=0, rejected=[rejection])
        assert obs is not None
        obs.uploader_id = uploader_id
        obs.source = Source.FORM
        self._append_record(obs)
        return IngestOutcome(accepted=1)

    def submit_report(self, submission: ReportSubmission) -> IngestOutcome:
        """Multi-measure form entry; every value shares the submission timestamp.

        Acceptance is per field: valid values are stored even when
        sibling fields are rejected.
        """
        template = self.catalog.report(submission.report_id)
        if template is None:
            raise UnknownReportTemplate(f"unknown report template {submission.report_id!r}")
        if not submission.values:
            raise ValueError("report submission carries no values")
        now = self.clock()
        outcome = IngestOutcome()
        for measure_id, value in submission.values.items():
            if measure_id not in template.measure_ids:
                outcome.rejected.append(Rejection(
                    measure_id, "not_in_template",
                    f"measure {measure_id!r} is not part of report {template.id!r}"))
                continue
            obs, rejection = self._validate_candidate(
                submission.lab_id, measure_id, submission.timestamp, value, now)
            if rejection is not None:
                outcome.rejected.append(rejection)
                continue
            assert obs is not None
            obs.uploader_id = submission.uploader_id
            obs.source = Source.REPORT
            self._append_record(obs)
            outcome.accepted += 1
        return outcome

    def import_file(self, lab_id: str, uploader_id: str, content: str) -> IngestOutcome:
        """CSV import (header `measure_id,timestamp,value,uploader_id`).

        Acceptance is per row: valid rows persist even when others fail.
        Rejection locators are 1-based row numbers counting the header as
        row 1. A row's own uploader_id wins; the importing uploader is
        the fallback for rows that leave it empty.
        """
        if content.startswith("﻿"):
            raise MalformedHeader("import must not carry a byte-order mark")
        reader = csv.reader(io.StringIO(content, newline=""))
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader("import is empty; expected header "
                                  + ",".join(CSV_HEADER)) from None
        except csv.Error as exc:
            raise MalformedHeader(f"unreadable header: {exc}") from exc
        if header != CSV_HEADER:
            raise MalformedHeader(
                f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")

        now = self.clock()
        outcome = IngestOutcome()
        row_number = 1
        while True:
            row_number += 1
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                outcome.rejected.append(Rejection(str(row_number), "bad_row", f"unparseable row: {exc}"))
                continue
            if not row:
                continue  # blank line, not a record
            locator = str(row_number)
            if len(row) != len(CSV_HEADER):
                outcome.rejected.append(Rejection(
                    locator, "bad_row", f"expected {len(CSV_HEADER)} fields, got {len(row)}"))
                continue
            measure_id, raw_timestamp, raw_value, row_uploader = row
            measure = self.catalog.measure(measure_id)
            if measure is None:
                outcome.rejected.append(Rejection(
                    locator, "unknown_measure", f"unknown measure {measure_id!r}"))
                continue
            try:
                timestamp = parse_utc(raw_timestamp)
            except ValueError:
                outcome.rejected.append(Rejection(
                    locator, "bad_timestamp",
                    f"timestamp {raw_timestamp!r} is not of the form YYYY-MM-DDThh:mm:ssZ"))
                continue
            value, code, message = self._parse_csv_value(measure, raw_value)
            if code:
                outcome.rejected.append(Rejection(locator, code, message))
                continue
            obs, rejection = self._validate_candidate(lab_id, measure_id, timestamp, value, now)
            if rejection is not None:
                outcome.rejected.append(Rejection(locator, rejection.code, rejection.message))
                continue
            assert obs is not None
            obs.uploader_id = row_uploader or uploader_id
            obs.source = Source.FILE
            self._append_record(obs)
            outcome.accepted += 1
        return outcome

    def _parse_csv_value(self, measure: MeasureDefinition,
                         text: str) -> tuple[float | int | bool | str | None, str, str]:
        vt = measure.value_type
        if vt is ValueType.BOOLEAN:
            if text == "true":
                return True, "", ""
            if text == "false":
                return False, "", ""
            return None, "type_mismatch", (
                f"measure {measure.id!r} expects true or false, got {text!r}")
        if vt is ValueType.CATEGORY:
            return text, "", ""  # membership checked downstream
        try:
            value = float(text)
        except ValueError:
            return None, "type_mismatch", f"measure {measure.id!r} expects a number, got {text!r}"
        if not math.isfinite(value):
            return None, "type_mismatch", f"measure {measure.id!r} expects a finite number"
        if vt is ValueType.INTEGER:
            if value.is_integer():
                return int(value), "", ""
            return None, "type_mismatch", f"measure {measure.id!r} expects a whole number, got {text!r}"
        return value, "", ""

    # --- queries ---

    def select(self, lab_id: str, measure_id: str, start: datetime, end: datetime,
               uploader_id: str | None = None) -> list[Observation]:
        """Accepted observations with start < timestamp <= end, ordered by
        timestamp, ties broken by ingested_at then insertion order."""
        with self._mutex:
            rows = list(self._index.get((lab_id, measure_id), ()))
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        out = []
        for timestamp, _, _, obs in rows:
            if start < timestamp <= end and (uploader_id is None or obs.uploader_id == uploader_id):
                out.append(obs)
        return out

    def query_series(self, lab_id: str, measure_id: str, start: datetime, end: datetime,
                     uploader_id: str | None = None) -> list[SeriesPoint]:
        """Numeric plot points for one measure at one lab, booleans as 0/1."""
        measure = self.catalog.measure(measure_id)
        if measure is None:
            raise UnknownMeasure(f"unknown measure {measure_id!r}")
        if measure.value_type is ValueType.CATEGORY:
            raise CategoryNotPlottable(f"category measure {measure_id!r} has no numeric series")
        if end < start:
            raise ValueError("series end precedes start")
        points = []
        for obs in self.select(lab_id, measure_id, start, end, uploader_id):
            value = obs.value
            if isinstance(value, bool):
                value = 1.0 if value else 0.0
            points.append(SeriesPoint(timestamp=obs.timestamp, value=float(value)))
        return points

    def export_csv(self, lab_id: str, measure_id: str, start: datetime, end: datetime,
                   uploader_id: str | None = None) -> str:
        """Observations in the import format; import_file(export_csv(...)) round-trips."""
        measure = self.catalog.measure(measure_id)
        if measure is None:
            raise UnknownMeasure(f"unknown measure {measure_id!r}")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for obs in self.select(lab_id, measure_id, start, end, uploader_id):
            writer.writerow([obs.measure_id, format_utc(obs.timestamp),
                             _encode_csv_value(measure, obs.value), obs.uploader_id])
        return buffer.getvalue()

    def coverage(self, lab_id: str, period_start: datetime, period_end: datetime) -> CoverageReport:
        """How completely each applicable measure was collected over the
        closed period [start, end], bucketed by its frequency.

        Duplicate observations in a bucket still fill it only once.
        """
        if self.catalog.lab(lab_id) is None:
            raise UnknownLab(f"unknown lab {lab_id!r}")
        if period_end < period_start:
            raise ValueError("period end precedes start")
        entries: list[CoverageEntry] = []
        for measure in self.catalog.measures:
            if not measure.scope.includes(lab_id):
                continue
            if measure.frequency is CollectionFrequency.PER_EVENT:
                entries.append(CoverageEntry(measure.id, 0, 0, []))
                continue
            labels = bucket_labels(period_start, period_end, measure.frequency)
            with self._mutex:
                rows = list(self._index.get((lab_id, measure.id), ()))
            filled = {bucket_label(ts, measure.frequency)
                      for ts, _, _, _ in rows if period_start <= ts <= period_end}
            missing = [label for label in labels if label not in filled]
            entries.append(CoverageEntry(
                measure.id, len(labels), len(labels) - len(missing), missing))
        return CoverageReport(lab_id=lab_id, period_start=period_start,
                              period_end=period_end, entries=entries)

    # --- evaluation history ---

    def append_evaluation(self, result: EvaluationResult) -> None:
        record = render.evaluation_result_json(result)
        path = self.root / "evaluations.jsonl"
        try:
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        except OSError as exc:
            raise StoreUnavailable(f"cannot append evaluation history: {exc}") from exc
        with self._mutex:
            self._history.append(record)

    def evaluation_history(self, kpi_id: str | None = None,
                           lab_id: str | None = None) -> list[dict]:
        with self._mutex:
            records = list(self._history)
        return [r for r in records
                if (kpi_id is None or r["kpi_id"] == kpi_id)
                and (lab_id is None or r["lab_id"] == lab_id)]

    # --- integrity ---

    def all_observations(self) -> list[Observation]:
        with self._mutex:
            rows = [row for rows in self._index.values() for row in rows]
        rows.sort(key=lambda r: r[2])
        return [obs for _, _, _, obs in rows]

    def revalidate(self) -> list[str]:
        """Re-check every stored observation against the catalog's
        invariants; a healthy log reports no violations."""
        problems: list[str] = []
        for obs in self.all_observations():
            measure = self.catalog.measure(obs.measure_id)
            if measure is None:
                problems.append(f"{obs.measure_id}: unknown measure")
                continue
            _, code, message = self._check_value(measure, obs.value)
            if code:
                problems.append(f"{obs.measure_id}: {message}")
            if not measure.scope.includes(obs.lab_id):
                problems.append(f"{obs.measure_id}: lab {obs.lab_id!r} out of scope")
            if obs.timestamp > obs.ingested_at + FUTURE_SKEW_ALLOWANCE:
                problems.append(f"{obs.measure_id}: timestamp runs ahead of ingestion")
        return problems


def _encode_csv_value(measure: MeasureDefinition, value: float | int | bool | str) -> str:
    if measure.value_type is ValueType.BOOLEAN:
        return "true" if value else "false"
    if measure.value_type is ValueType.CATEGORY:
        return str(value)
    if measure.value_type is ValueType.INTEGER:
        return str(int(value))
    return repr(float(value))
