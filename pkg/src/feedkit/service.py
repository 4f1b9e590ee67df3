"""HTTP API: one interface for gathering data, one for reading it back.

Every response is either the documented success shape or an error
envelope ``{"error": {"code", "message", "details"?}}``; 4xx codes mean
the caller must change something, 5xx mean the store is unhealthy.
GET endpoints never write: evaluation-style reads recompute instead of
persisting, so the observation logs are bit-identical before and after
any read. POSTs are deliberately not idempotent - resubmitting stores a
duplicate observation (see docs/api.md).
"""

from __future__ import annotations

import hashlib
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import analytics, engine, render
from .model import Catalog
from .store import (
    CategoryNotPlottable,
    MalformedHeader,
    ReportSubmission,
    Store,
    StoreUnavailable,
    UnknownMeasure,
    UnknownReportTemplate,
)
from .timeutil import format_utc, parse_duration, parse_utc, utc_now


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str, details: Any = None):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message
        self.details = details

    def response(self) -> JSONResponse:
        body: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details is not None:
            body["details"] = self.details
        return JSONResponse(status_code=self.http_status, content={"error": body})


def _require_lab(catalog: Catalog, lab_id: str) -> None:
    if catalog.lab(lab_id) is None:
        raise ApiError(404, "unknown_lab", f"unknown lab {lab_id!r}")


def _require_kpi(catalog: Catalog, kpi_id: str):
    kpi = catalog.kpi(kpi_id)
    if kpi is None:
        raise ApiError(404, "unknown_kpi", f"unknown kpi {kpi_id!r}")
    return kpi


def _instant(raw: str | None, name: str, default: datetime | None = None) -> datetime:
    if raw is None:
        if default is not None:
            return default
        raise ApiError(400, "missing_param", f"query parameter {name!r} is required")
    try:
        return parse_utc(raw)
    except ValueError:
        raise ApiError(400, "bad_timestamp",
                       f"{name!r} must be of the form YYYY-MM-DDThh:mm:ssZ, got {raw!r}") from None


def _duration(raw: str | None, name: str):
    if raw is None:
        raise ApiError(400, "missing_param", f"query parameter {name!r} is required")
    try:
        return parse_duration(raw)
    except ValueError as exc:
        raise ApiError(400, "bad_duration", str(exc)) from None


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "bad_request", "request body must be a JSON object") from None
    if not isinstance(body, dict):
        raise ApiError(400, "bad_request", "request body must be a JSON object")
    return body


def _field(body: dict, name: str) -> Any:
    if name not in body:
        raise ApiError(400, "bad_request", f"missing field {name!r}")
    return body[name]


def create_app(catalog: Catalog, store: Store, catalog_text: str | None = None,
               ui_dir: str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        store.close()  # graceful shutdown flushes pending appends

    app = FastAPI(title="feedkit", docs_url=None, redoc_url=None, openapi_url=None,
                  lifespan=lifespan)
    if ui_dir is not None:
        from starlette.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    checksum = hashlib.sha256(
        (catalog_text if catalog_text is not None else "").encode("utf-8")).hexdigest()

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError) -> JSONResponse:
        return exc.response()

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return ApiError(400, "bad_request", "invalid request", details=exc.errors()).response()

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        code = {404: "not_found", 405: "method_not_allowed"}.get(exc.status_code, "http_error")
        return ApiError(exc.status_code, code, str(exc.detail)).response()

    @app.exception_handler(StoreUnavailable)
    async def _store_error(request: Request, exc: StoreUnavailable) -> JSONResponse:
        return ApiError(503, "store_unavailable", str(exc)).response()

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception) -> JSONResponse:
        return ApiError(500, "internal_error", "internal error").response()

    # --- meta ---

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "catalog_checksum": checksum}

    @app.get("/catalog")
    def get_catalog() -> dict:
        return render.catalog_json(catalog)

    # --- ingestion ---

    @app.post("/labs/{lab_id}/observations")
    async def post_observation(lab_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        body = await _json_body(request)
        timestamp = _instant(str(_field(body, "timestamp")), "timestamp")
        value = _field(body, "value")
        if not isinstance(value, (int, float, bool, str)):
            raise ApiError(400, "bad_request", "value must be a number, boolean or string")
        uploader = _field(body, "uploader_id")
        if not isinstance(uploader, str) or not uploader:
            raise ApiError(400, "bad_request", "uploader_id must be a non-empty string")
        measure_id = _field(body, "measure_id")
        if not isinstance(measure_id, str):
            raise ApiError(400, "bad_request", "measure_id must be a string")
        outcome = store.submit_observation(
            lab_id=lab_id, measure_id=measure_id, timestamp=timestamp,
            value=value, uploader_id=uploader)
        return _outcome_json(outcome)

    @app.post("/labs/{lab_id}/reports/{report_id}")
    async def post_report(lab_id: str, report_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        body = await _json_body(request)
        timestamp = _instant(str(_field(body, "timestamp")), "timestamp")
        uploader = _field(body, "uploader_id")
        if not isinstance(uploader, str) or not uploader:
            raise ApiError(400, "bad_request", "uploader_id must be a non-empty string")
        values = _field(body, "values")
        if not isinstance(values, dict) or not values:
            raise ApiError(400, "bad_request", "values must be a non-empty object")
        submission = ReportSubmission(report_id=report_id, lab_id=lab_id,
                                      timestamp=timestamp, values=values, uploader_id=uploader)
        try:
            outcome = store.submit_report(submission)
        except UnknownReportTemplate as exc:
            raise ApiError(404, "unknown_report", str(exc)) from None
        return _outcome_json(outcome)

    @app.post("/labs/{lab_id}/import")
    async def post_import(lab_id: str, request: Request, uploader: str | None = None) -> dict:
        _require_lab(catalog, lab_id)
        raw = await request.body()
        try:
            content = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise ApiError(400, "bad_encoding", "import body must be UTF-8 text") from None
        try:
            outcome = store.import_file(lab_id, uploader or "", content)
        except MalformedHeader as exc:
            raise ApiError(400, "malformed_header", str(exc)) from None
        return _outcome_json(outcome)

    # --- series and status ---

    @app.get("/labs/{lab_id}/measures/{measure_id}/series")
    def measure_series(lab_id: str, measure_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        params = request.query_params
        start = _instant(params.get("from"), "from")
        end = _instant(params.get("to"), "to")
        if end < start:
            raise ApiError(400, "bad_range", "'to' precedes 'from'")
        try:
            points = store.query_series(lab_id, measure_id, start, end,
                                        uploader_id=params.get("uploader"))
        except UnknownMeasure as exc:
            raise ApiError(404, "unknown_measure", str(exc)) from None
        except CategoryNotPlottable as exc:
            raise ApiError(400, "category_not_plottable", str(exc)) from None
        return render.series_json(points)

    @app.get("/labs/{lab_id}/kpis/{kpi_id}/status")
    def kpi_status(lab_id: str, kpi_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        _require_kpi(catalog, kpi_id)
        at = _instant(request.query_params.get("at"), "at", default=utc_now())
        result = _evaluate(catalog, store, kpi_id, lab_id, at)
        return render.evaluation_result_json(result)

    @app.get("/labs/{lab_id}/kpis/{kpi_id}/series")
    def kpi_series(lab_id: str, kpi_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        _require_kpi(catalog, kpi_id)
        params = request.query_params
        start = _instant(params.get("from"), "from")
        end = _instant(params.get("to"), "to")
        step = _duration(params.get("step"), "step")
        if end < start:
            raise ApiError(400, "bad_range", "'to' precedes 'from'")
        try:
            points = engine.kpi_status_series(kpi_id, lab_id, start, end, step, catalog, store)
        except engine.LabOutOfScope as exc:
            raise ApiError(409, "lab_out_of_scope", str(exc)) from None
        return render.status_series_json(points)

    @app.get("/labs/{lab_id}/coverage")
    def coverage(lab_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        params = request.query_params
        start = _instant(params.get("from"), "from")
        end = _instant(params.get("to"), "to")
        if end < start:
            raise ApiError(400, "bad_range", "'to' precedes 'from'")
        report = store.coverage(lab_id, start, end)
        return {
            "lab_id": report.lab_id,
            "period": {"start": format_utc(report.period_start),
                       "end": format_utc(report.period_end)},
            "entries": [{"measure_id": e.measure_id,
                         "expected_buckets": e.expected_buckets,
                         "filled_buckets": e.filled_buckets,
                         "missing_buckets": list(e.missing_buckets)}
                        for e in report.entries],
        }

    # --- federation ---

    @app.get("/federation/summary")
    def federation(request: Request) -> dict:
        at = _instant(request.query_params.get("at"), "at", default=utc_now())
        summary = analytics.federation_summary(catalog, store, at)
        return {
            "evaluated_at": format_utc(summary.evaluated_at),
            "rows": [{"kpi_id": row.kpi_id,
                      "statuses": dict(row.statuses),
                      **({"notes": dict(row.notes)} if row.notes else {})}
                     for row in summary.rows],
        }

    @app.get("/labs/{lab_id}/tradeoffs")
    def lab_tradeoffs(lab_id: str, request: Request) -> dict:
        _require_lab(catalog, lab_id)
        params = request.query_params
        raw_metrics = params.get("metrics")
        if not raw_metrics:
            raise ApiError(400, "missing_param", "query parameter 'metrics' is required")
        selection: list[tuple[str, str]] = []
        for item in raw_metrics.split(","):
            kpi_id, sep, metric_id = item.strip().partition(".")
            if not sep or not kpi_id or not metric_id:
                raise ApiError(400, "bad_request",
                               f"metrics entries must look like KPI.metric, got {item!r}")
            kpi = _require_kpi(catalog, kpi_id)
            if kpi.metric(metric_id) is None:
                raise ApiError(404, "unknown_metric",
                               f"kpi {kpi_id!r} has no metric {metric_id!r}")
            selection.append((kpi_id, metric_id))
        if len(selection) < 2:
            raise ApiError(400, "bad_request", "trade-off analysis needs at least two metrics")
        start = _instant(params.get("from"), "from")
        end = _instant(params.get("to"), "to")
        step = _duration(params.get("step"), "step")
        if end < start:
            raise ApiError(400, "bad_range", "'to' precedes 'from'")
        try:
            matrix = analytics.tradeoffs(catalog, store, lab_id, selection, start, end, step)
        except engine.LabOutOfScope as exc:
            raise ApiError(409, "lab_out_of_scope", str(exc)) from None
        return {
            "lab_id": matrix.lab_id,
            "window": {"start": format_utc(matrix.window_start),
                       "end": format_utc(matrix.window_end)},
            "step": str(matrix.sample_step),
            "metric_ids": [f"{k}.{m}" for k, m in matrix.metric_ids],
            "r": matrix.r,
            "flags": [{"first": f"{f.first[0]}.{f.first[1]}",
                       "second": f"{f.second[0]}.{f.second[1]}",
                       "r": f.r} for f in matrix.flags],
            "note": "correlation is not causation; flags are candidates for review",
        }

    return app


def _evaluate(catalog: Catalog, store: Store, kpi_id: str, lab_id: str, at: datetime):
    try:
        return engine.evaluate(
            engine.EvaluationRequest(kpi_id=kpi_id, lab_id=lab_id, evaluated_at=at),
            catalog, store, persist=False)
    except engine.LabOutOfScope as exc:
        raise ApiError(409, "lab_out_of_scope", str(exc)) from None


def _outcome_json(outcome) -> dict:
    return {
        "accepted": outcome.accepted,
        "rejected": [{"locator": r.locator, "code": r.code, "message": r.message}
                     for r in outcome.rejected],
    }
