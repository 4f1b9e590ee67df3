"""feedkit: federated KPI monitoring for living-lab networks.

A declarative `.kpi` catalog defines measures, metrics, KPIs, targets
and actions; the engine ingests observations under the shared data
protocol, evaluates KPI status per lab, detects metric trade-offs, and
serves both lab-local views and federation-wide comparisons.
"""

from .analytics import FederationSummary, TradeoffMatrix, federation_summary, pearson, tradeoffs
from .dsl import ParseError, ParseResult, lint_catalog, parse_catalog, serialize_catalog
from .engine import (
    EvaluationRequest,
    LabOutOfScope,
    UnknownKpi,
    UnknownLab,
    aggregate,
    eval_expression,
    eval_target,
    evaluate,
    kpi_status_series,
)
from .model import (
    INSUFFICIENT_DATA,
    Catalog,
    CatalogError,
    Duration,
    EvaluationResult,
    KpiDefinition,
    MeasureDefinition,
    Observation,
    Status,
    validate_catalog,
)
from .sample import load_sample_catalog, sample_catalog_path, sample_catalog_text
from .store import IngestOutcome, ReportSubmission, Store

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogError",
    "Duration",
    "EvaluationRequest",
    "EvaluationResult",
    "FederationSummary",
    "INSUFFICIENT_DATA",
    "IngestOutcome",
    "KpiDefinition",
    "LabOutOfScope",
    "MeasureDefinition",
    "Observation",
    "ParseError",
    "ParseResult",
    "ReportSubmission",
    "Status",
    "Store",
    "TradeoffMatrix",
    "UnknownKpi",
    "UnknownLab",
    "aggregate",
    "eval_expression",
    "eval_target",
    "evaluate",
    "federation_summary",
    "kpi_status_series",
    "lint_catalog",
    "load_sample_catalog",
    "parse_catalog",
    "pearson",
    "sample_catalog_path",
    "sample_catalog_text",
    "serialize_catalog",
    "tradeoffs",
    "validate_catalog",
]
