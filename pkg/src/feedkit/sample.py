"""Access to the catalog that ships with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dsl import parse_catalog
from .model import Catalog

SAMPLE_CATALOG_NAME = "feed4food.kpi"


def sample_catalog_path() -> Path:
    return Path(str(resources.files("feedkit").joinpath("data", SAMPLE_CATALOG_NAME)))


def sample_catalog_text() -> str:
    return sample_catalog_path().read_text(encoding="utf-8")


def load_sample_catalog() -> Catalog:
    result = parse_catalog(sample_catalog_text(), filename=SAMPLE_CATALOG_NAME)
    if result.catalog is None:
        raise RuntimeError("shipped catalog does not parse: "
                           + "; ".join(e.render() for e in result.errors))
    return result.catalog
