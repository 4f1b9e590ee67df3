"""feedctl: validate catalogs, ingest files, evaluate KPIs, and serve the API.

Exit codes are scriptable:
  validate   0 clean, 1 findings, 2 unreadable file
  ingest     0 all rows accepted, 1 rejections or malformed header, 2 setup error
  eval       0 met, 3 not met, 4 insufficient data, 2 unknown ids
Configuration precedence: flags, then environment (FEEDKIT_STORE), then
an optional JSON config file, then defaults.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import engine
from .analytics import federation_summary
from .dsl import lint_catalog, parse_catalog
from .model import INSUFFICIENT_DATA, Catalog, Status, validate_catalog
from .render import evaluation_result_json
from .sample import sample_catalog_path
from .store import MalformedHeader, Store, StoreUnavailable
from .timeutil import parse_utc, utc_now

_FALLBACK = {"catalog": None, "store": "./feedkit-store", "host": "127.0.0.1", "port": 8000}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}")


def _setting(ctx: click.Context, key: str):
    flag = ctx.obj["flags"].get(key)
    if flag is not None:
        return flag
    config_value = ctx.obj["config"].get(key)
    if config_value is not None:
        return config_value
    return _FALLBACK[key]


@click.group()
@click.option("--catalog", "catalog_path", type=click.Path(), default=None,
              help="Catalog file (.kpi). Defaults to the shipped sample catalog.")
@click.option("--store", "store_path", type=click.Path(), envvar="FEEDKIT_STORE", default=None,
              help="Store directory. Env: FEEDKIT_STORE.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Optional JSON config file with catalog/store/host/port keys.")
@click.pass_context
def main(ctx: click.Context, catalog_path: str | None, store_path: str | None,
         config_path: str | None) -> None:
    ctx.ensure_object(dict)
    ctx.obj["flags"] = {"catalog": catalog_path, "store": store_path}
    ctx.obj["config"] = _load_config(config_path)


def _read_catalog_file(path: str | None) -> tuple[str, str]:
    """Returns (text, filename); exits 2 when the file is unreadable."""
    file_path = Path(path) if path else sample_catalog_path()
    try:
        return file_path.read_text(encoding="utf-8"), str(file_path)
    except OSError as exc:
        click.echo(f"error: cannot read {file_path}: {exc}", err=True)
        sys.exit(2)


def _load_validated_catalog(ctx: click.Context) -> tuple[Catalog, str]:
    text, filename = _read_catalog_file(_setting(ctx, "catalog"))
    result = parse_catalog(text, filename=filename)
    if result.catalog is None:
        for error in result.errors:
            click.echo(error.render(), err=True)
        sys.exit(2)
    errors = validate_catalog(result.catalog)
    if errors:
        for error in errors:
            span = result.spans.get((error.kind, error.subject_id))
            where = f"{filename}:{span.line}:{span.column}" if span else f"{filename}:1:1"
            click.echo(f"{where} {error.code} {error.message}", err=True)
        sys.exit(2)
    return result.catalog, text


def _open_store(ctx: click.Context, catalog: Catalog) -> Store:
    try:
        return Store(_setting(ctx, "store"), catalog)
    except StoreUnavailable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--strict", is_flag=True, help="Treat lint warnings as failures.")
def validate(path: str, strict: bool) -> None:
    """Parse, validate and lint a catalog file."""
    text, filename = _read_catalog_file(path)
    result = parse_catalog(text, filename=filename)
    failed = False
    if result.errors:
        for error in result.errors:
            click.echo(error.render())
        sys.exit(1)
    assert result.catalog is not None
    errors = validate_catalog(result.catalog)
    for error in errors:
        span = result.spans.get((error.kind, error.subject_id))
        where = f"{filename}:{span.line}:{span.column}" if span else f"{filename}:1:1"
        click.echo(f"{where} {error.code} {error.message}")
        failed = True
    findings = lint_catalog(result.catalog, result.spans)
    for finding in findings:
        click.echo(f"{finding.render()} [{finding.severity}]")
        if strict and finding.severity == "warning":
            failed = True
    if failed:
        sys.exit(1)
    counts = (f"{len(result.catalog.labs)} labs, {len(result.catalog.measures)} measures, "
              f"{len(result.catalog.reports)} reports, {len(result.catalog.kpis)} kpis")
    click.echo(f"ok: {counts}" + (f", {len(findings)} lint note(s)" if findings else ""))


@main.command()
@click.argument("lab")
@click.argument("file", type=click.Path())
@click.option("--uploader", required=True, help="Uploader recorded for rows without one.")
@click.pass_context
def ingest(ctx: click.Context, lab: str, file: str, uploader: str) -> None:
    """Import a CSV observation file into the store."""
    catalog, _ = _load_validated_catalog(ctx)
    if catalog.lab(lab) is None:
        click.echo(f"error: unknown lab {lab!r}", err=True)
        sys.exit(2)
    try:
        content = Path(file).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot read {file}: {exc}", err=True)
        sys.exit(2)
    store = _open_store(ctx, catalog)
    try:
        outcome = store.import_file(lab, uploader, content)
    except MalformedHeader as exc:
        click.echo(f"malformed header: {exc}", err=True)
        sys.exit(1)
    finally:
        store.close()
    click.echo(f"accepted {outcome.accepted}, rejected {len(outcome.rejected)}")
    for rejection in outcome.rejected:
        click.echo(f"  row {rejection.locator}: {rejection.code} {rejection.message}")
    if outcome.rejected:
        sys.exit(1)


@main.command("eval")
@click.option("--kpi", "kpi_id", required=True)
@click.option("--lab", "lab_id", required=True)
@click.option("--at", "at_text", default=None, help="Instant YYYY-MM-DDThh:mm:ssZ (default: now).")
@click.pass_context
def eval_cmd(ctx: click.Context, kpi_id: str, lab_id: str, at_text: str | None) -> None:
    """Evaluate one KPI for one lab and record it in the audit history."""
    catalog, _ = _load_validated_catalog(ctx)
    at = utc_now()
    if at_text is not None:
        try:
            at = parse_utc(at_text)
        except ValueError:
            click.echo(f"error: --at must be YYYY-MM-DDThh:mm:ssZ, got {at_text!r}", err=True)
            sys.exit(2)
    store = _open_store(ctx, catalog)
    try:
        result = engine.evaluate(
            engine.EvaluationRequest(kpi_id=kpi_id, lab_id=lab_id, evaluated_at=at),
            catalog, store, persist=True)
    except (engine.UnknownKpi, engine.UnknownLab, engine.LabOutOfScope) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    finally:
        store.close()

    rendered = evaluation_result_json(result)
    click.echo(f"{result.kpi_id} @ {lab_id} over {rendered['window_start']}"
               f" .. {rendered['window_end']}")
    for metric_id, value in result.metric_values.items():
        outcome = result.predicate_outcomes.get(metric_id)
        suffix = f" [{outcome.value}]" if outcome else ""
        shown = "insufficient data" if value is INSUFFICIENT_DATA else f"{value:g}"
        click.echo(f"  {metric_id} = {shown}{suffix}")
    click.echo(f"status: {result.status.value}")
    if result.triggered_actions:
        click.echo("actions:")
        for action in result.triggered_actions:
            click.echo(f"  - {action.description}")
    if result.status is Status.MET:
        sys.exit(0)
    sys.exit(3 if result.status is Status.NOT_MET else 4)


@main.command()
@click.option("--at", "at_text", default=None, help="Instant YYYY-MM-DDThh:mm:ssZ (default: now).")
@click.pass_context
def summary(ctx: click.Context, at_text: str | None) -> None:
    """Print the federation status matrix (KPI x lab)."""
    catalog, _ = _load_validated_catalog(ctx)
    at = utc_now()
    if at_text is not None:
        try:
            at = parse_utc(at_text)
        except ValueError:
            click.echo(f"error: --at must be YYYY-MM-DDThh:mm:ssZ, got {at_text!r}", err=True)
            sys.exit(2)
    store = _open_store(ctx, catalog)
    try:
        matrix = federation_summary(catalog, store, at)
    finally:
        store.close()

    short = {"met": "met", "not_met": "NOT MET", "insufficient_data": "no data",
             "not_applicable": "n/a"}
    labs = [lab.id for lab in catalog.labs]
    width = max([len(lab) for lab in labs] + [8])
    header = "kpi   " + "  ".join(lab.ljust(width) for lab in labs)
    click.echo(header)
    for row in matrix.rows:
        cells = "  ".join(short[row.statuses[lab]].ljust(width) for lab in labs)
        click.echo(f"{row.kpi_id:<5} {cells}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Serve a built web dashboard from this directory under /ui.")
@click.pass_context
def serve(ctx: click.Context, host: str | None, port: int | None, ui_dir: str | None) -> None:
    """Run the HTTP API (refuses to start on a broken catalog)."""
    import uvicorn

    from .service import create_app

    catalog, text = _load_validated_catalog(ctx)
    store = _open_store(ctx, catalog)
    app = create_app(catalog, store, catalog_text=text, ui_dir=ui_dir)
    uvicorn.run(app,
                host=host or ctx.obj["config"].get("host") or _FALLBACK["host"],
                port=port or ctx.obj["config"].get("port") or _FALLBACK["port"])


if __name__ == "__main__":
    main()
