"""Solver service smoke test (HTTP solve + background benchmark).

This script is meant to be a fast validation tool for local dev setup.

It runs the FastAPI app in-process using TestClient and validates that:

1) The service starts against a throwaway SQLite history database
2) POST /solve answers a small SAT and a small UNSAT instance correctly
3) POST /bench runs a generated baseline-vs-CRVR suite and stores the report

Usage (from the repository root):

    python workspace/solver_service_smoketest.py

Environment:

- BENCH_DB_PATH: SQLite file for the run history (defaults to workspace/dev_data)
"""

import os
import sys
import argparse
import tempfile

from fastapi.testclient import TestClient


PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
DEV_DATA_DIR = os.path.join(PROJECT_ROOT, "workspace", "dev_data")
DEFAULT_DB_PATH = os.path.join(DEV_DATA_DIR, "bench_smoketest.db")


def _parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Solver service smoke test (solve + benchmark round trip)."
    )
    parser.add_argument(
        "--db-path",
        default=os.getenv("BENCH_DB_PATH", DEFAULT_DB_PATH),
        help=f"SQLite file for the benchmark history. Default: {DEFAULT_DB_PATH}",
    )
    parser.add_argument("--instances", type=int, default=3, help="Random 3-SAT instances in the suite.")
    parser.add_argument("--vars", type=int, default=20, help="Variables per random instance.")
    return parser.parse_args()


args = _parse_args()
os.makedirs(os.path.dirname(os.path.abspath(args.db_path)), exist_ok=True)
# database.py reads this at import time
os.environ["BENCH_DB_PATH"] = args.db_path
sys.path.insert(0, PROJECT_ROOT)

import harness  # noqa: E402
import main  # noqa: E402

SAT_TEXT = "p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n"
UNSAT_TEXT = "p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n"

with TestClient(main.app) as client:
    r = client.get('/')
    print('[service] root', r.status_code, r.json())

    r = client.post('/solve', json={'dimacs': SAT_TEXT})
    print('[solve] sat', r.status_code, r.json().get('outcome'), r.json().get('model'))
    if r.status_code != 200 or r.json().get('outcome') != 'SAT':
        raise SystemExit(1)

    r = client.post('/solve', json={'dimacs': UNSAT_TEXT, 'crvr': True})
    print('[solve] unsat', r.status_code, r.json().get('outcome'))
    if r.status_code != 200 or r.json().get('outcome') != 'UNSAT':
        raise SystemExit(1)

    with tempfile.TemporaryDirectory() as suite_dir:
        harness.generate_suite(suite_dir, count=args.instances, num_vars=args.vars, pigeons=(4,))
        r = client.post('/bench', json={'directory': suite_dir, 'compare_crvr': True, 'timeout': 30})
        print('[bench] queued', r.status_code, r.json())
        if r.status_code != 202:
            raise SystemExit(1)
        run_id = r.json()['run_id']

        # TestClient runs background tasks before returning the response
        r = client.get(f'/bench/{run_id}')
        record = r.json()
        print('[bench] status', r.status_code, record.get('status'), 'solved', record.get('solved'))
        if record.get('status') != 'done':
            print('[bench] error:', record.get('error'))
            raise SystemExit(1)
        if record['report']['contradictions']:
            print('[bench] contradicting outcomes:', record['report']['contradictions'])
            raise SystemExit(1)

print('OK: service booted, solved SAT/UNSAT instances and stored a baseline-vs-CRVR benchmark.')
