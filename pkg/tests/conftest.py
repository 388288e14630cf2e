import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

FIXTURES = PROJECT_ROOT / "tests" / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def db_path(tmp_path, monkeypatch) -> str:
    """Point the history database at a throwaway file."""
    import database

    path = str(tmp_path / "bench.db")
    monkeypatch.setattr(database, "DATABASE_NAME", path)
    database.initialize_db()
    return path

