import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app.services.materials import MaterialDatabase  # noqa: E402


@pytest.fixture
def database() -> MaterialDatabase:
    return MaterialDatabase.defaults()


@pytest.fixture
def gaas(database):
    return database.get("GaAs")


@pytest.fixture
def alas(database):
    return database.get("AlAs")
