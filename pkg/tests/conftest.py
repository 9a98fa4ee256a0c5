from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gradelens.seed import seed_demo
from gradelens.service import Service
from gradelens.store import open_store


@pytest.fixture()
def store(tmp_path):
    store = open_store(tmp_path / "data")
    yield store
    store.close()


@pytest.fixture()
def service(store):
    return Service(store)


@pytest.fixture(scope="session")
def seeded(tmp_path_factory):
    """Session-wide seeded demo store; read-only in tests that use it."""
    store = open_store(tmp_path_factory.mktemp("demo") / "data")
    ids = seed_demo(store)
    yield Service(store), ids
    store.close()
