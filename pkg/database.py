# database.py
import json
import os
import sqlite3
import logging
from pathlib import Path
from typing import List, Optional, Union

from models import BenchmarkReport, ComparisonReport

logger = logging.getLogger(__name__)

DATABASE_NAME = os.environ.get("BENCH_DB_PATH", "data/bench.db")


def get_db_connection():
    """Establishes a connection to the database."""
    db_path = Path(DATABASE_NAME)
    db_path.parent.mkdir(parents=True, exist_ok=True)
    conn = sqlite3.connect(DATABASE_NAME)
    conn.row_factory = sqlite3.Row
    return conn


def initialize_db():
    """Creates the benchmark tables if they don't exist."""
    conn = get_db_connection()
    cursor = conn.cursor()

    # One row per benchmark invocation (CLI or HTTP)
    cursor.execute("""
        CREATE TABLE IF NOT EXISTS bench_runs (
            run_id      TEXT PRIMARY KEY,
            created_at  TEXT DEFAULT CURRENT_TIMESTAMP,
            finished_at TEXT,
            status      TEXT NOT NULL DEFAULT 'queued',
            kind        TEXT NOT NULL DEFAULT 'single',
            directory   TEXT,
            solved      INTEGER,
            par2        REAL,
            report_json TEXT,
            error       TEXT
        )
    """)

    # Per-instance results, so runs can be compared without parsing JSON
    cursor.execute("""
        CREATE TABLE IF NOT EXISTS bench_rows (
            run_id     TEXT NOT NULL,
            instance   TEXT NOT NULL,
            config     TEXT NOT NULL,
            outcome    TEXT NOT NULL,
            wall_time  REAL DEFAULT 0,
            stats_json TEXT,
            PRIMARY KEY (run_id, instance, config),
            FOREIGN KEY (run_id) REFERENCES bench_runs(run_id) ON DELETE CASCADE
        )
    """)
    cursor.execute("CREATE INDEX IF NOT EXISTS idx_bench_rows_instance ON bench_rows(instance)")

    conn.commit()
    conn.close()


def create_run(run_id: str, directory: str, kind: str = "single", status: str = "queued") -> None:
    conn = get_db_connection()
    try:
        conn.execute(
            "INSERT INTO bench_runs (run_id, status, kind, directory) VALUES (?, ?, ?, ?)",
            (run_id, status, kind, directory),
        )
        conn.commit()
    finally:
        conn.close()


def update_run_status(run_id: str, status: str, error: Optional[str] = None) -> None:
    conn = get_db_connection()
    try:
        conn.execute("UPDATE bench_runs SET status = ?, error = ? WHERE run_id = ?", (status, error, run_id))
        conn.commit()
    finally:
        conn.close()


def save_report(run_id: str, report: Union[BenchmarkReport, ComparisonReport],
                directory: Optional[str] = None) -> None:
    """Stores a finished report, creating the run row when it doesn't exist yet."""
    if isinstance(report, ComparisonReport):
        kind = "comparison"
        reports = [report.baseline, report.crvr]
        solved, par2 = report.crvr.summary.solved, report.crvr.summary.par2
    else:
        kind = "single"
        reports = [report]
        solved, par2 = report.summary.solved, report.summary.par2

    conn = get_db_connection()
    try:
        conn.execute(
            "INSERT OR IGNORE INTO bench_runs (run_id, kind, directory) VALUES (?, ?, ?)",
            (run_id, kind, directory),
        )
        conn.execute(
            """UPDATE bench_runs
               SET status = 'done', kind = ?, solved = ?, par2 = ?, report_json = ?,
                   finished_at = CURRENT_TIMESTAMP, error = NULL,
                   directory = COALESCE(?, directory)
               WHERE run_id = ?""",
            (kind, solved, par2, report.model_dump_json(), directory, run_id),
        )
        for rep in reports:
            conn.executemany(
                "INSERT OR REPLACE INTO bench_rows (run_id, instance, config, outcome, wall_time, stats_json) "
                "VALUES (?, ?, ?, ?, ?, ?)",
                [(run_id, row.instance, row.config, row.outcome, row.wall_time,
                  row.stats.model_dump_json() if row.stats else None) for row in rep.rows],
            )
        conn.commit()
        logger.info("Stored %s run %s (%d rows)", kind, run_id, sum(len(r.rows) for r in reports))
    finally:
        conn.close()


def list_runs() -> List[dict]:
    conn = get_db_connection()
    try:
        rows = conn.execute(
            "SELECT run_id, created_at, finished_at, status, kind, directory, solved, par2, error "
            "FROM bench_runs ORDER BY created_at DESC, run_id"
        ).fetchall()
        return [dict(r) for r in rows]
    finally:
        conn.close()


def load_report(run_id: str) -> Optional[dict]:
    """Run record with the parsed report (``None`` until the run finishes)."""
    conn = get_db_connection()
    try:
        row = conn.execute("SELECT * FROM bench_runs WHERE run_id = ?", (run_id,)).fetchone()
    finally:
        conn.close()
    if row is None:
        return None
    record = dict(row)
    raw = record.pop("report_json")
    record["report"] = json.loads(raw) if raw else None
    return record


def instance_history(instance: str) -> List[dict]:
    conn = get_db_connection()
    try:
        rows = conn.execute(
            "SELECT r.run_id, r.created_at, b.config, b.outcome, b.wall_time "
            "FROM bench_rows b JOIN bench_runs r ON r.run_id = b.run_id "
            "WHERE b.instance = ? ORDER BY r.created_at, b.config",
            (instance,),
        ).fetchall()
        return [dict(r) for r in rows]
    finally:
        conn.close()


if __name__ == "__main__":
    initialize_db()
    print(f"Initialized {DATABASE_NAME}")
