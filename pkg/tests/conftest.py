from __future__ import annotations

import pytest

from feedkit.model import Catalog
from feedkit.sample import load_sample_catalog, sample_catalog_text
from feedkit.store import Store
from feedkit.timeutil import parse_utc

# Fixed "now" for deterministic ingestion and future-timestamp checks.
NOW = parse_utc("2026-04-15T12:00:00Z")


@pytest.fixture(scope="session")
def sample_catalog() -> Catalog:
    return load_sample_catalog()


@pytest.fixture(scope="session")
def sample_text() -> str:
    return sample_catalog_text()


@pytest.fixture
def make_store(tmp_path, sample_catalog):
    """Store factory pinned to the fixed clock; reuse a path to test replay."""

    def factory(catalog: Catalog | None = None, subdir: str = "store", clock=None) -> Store:
        return Store(tmp_path / subdir, catalog or sample_catalog, clock=clock or (lambda: NOW))

    return factory


@pytest.fixture
def store(make_store) -> Store:
    return make_store()
