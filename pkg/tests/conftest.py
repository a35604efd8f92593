"""Session-scoped engines shared across the suite.

Training the shared models once keeps the whole run fast; every fixture is
seeded, so tests that compare against retrained copies stay meaningful.
"""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from alttrip.dataset import POICatalog, Route, load_catalog, load_visits, build_routes
from alttrip.itrnet import ITRConfig, train_itrnet
from alttrip.poigraph import embed_catalog

FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures" / "midtown"

# strong enough for stable greedy decoding, cheap enough for a shared fixture
MIDTOWN_ITR = ITRConfig(epochs=60, seed=0)


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def midtown_manifest() -> dict:
    with open(FIXTURE_DIR / "manifest.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def midtown_catalog() -> POICatalog:
    return load_catalog(FIXTURE_DIR / "pois.csv")


@pytest.fixture(scope="session")
def midtown_routes(midtown_catalog) -> list[Route]:
    visits = load_visits(FIXTURE_DIR / "visits.csv")
    return build_routes(visits, midtown_catalog, gap_hours=8.0)


@pytest.fixture(scope="session")
def midtown_emb(midtown_catalog):
    return embed_catalog(midtown_catalog)


@pytest.fixture(scope="session")
def midtown_model(midtown_catalog, midtown_routes, midtown_emb):
    return train_itrnet(midtown_routes, midtown_emb, midtown_catalog, MIDTOWN_ITR)
