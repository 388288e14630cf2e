# main.py
import os
import uuid
import logging
from contextlib import asynccontextmanager
from typing import List

from dotenv import load_dotenv
from fastapi import BackgroundTasks, FastAPI, HTTPException, status
from fastapi.middleware.cors import CORSMiddleware

import database
from cnf import DimacsParseError, parse_dimacs
from engine import Outcome, solve
from harness import discover_instances, run_benchmark, run_comparison
from models import BenchAccepted, BenchRequest, RunSpec, SolveRequest, SolveResponse, SolverConfig

load_dotenv()

logging.basicConfig(level=os.getenv("LOG_LEVEL", "INFO"), format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
logger = logging.getLogger(__name__)

# --- Configuration Constants ---
MAX_DIMACS_BYTES = int(os.getenv("MAX_DIMACS_BYTES", 10 * 1024 * 1024))
SOLVE_TIMEOUT_CAP_SEC = float(os.getenv("SOLVE_TIMEOUT_CAP_SEC", 300))


@asynccontextmanager
async def lifespan(app: FastAPI):
    database.initialize_db()
    logger.info("Benchmark database ready at %s", database.DATABASE_NAME)
    yield


app = FastAPI(title="CDCL solver service", lifespan=lifespan)

origins_from_env_str = os.getenv("ALLOWED_ORIGINS", "http://localhost:5173")
configured_origins = [o.strip() for o in origins_from_env_str.split(',') if o.strip()]
logger.info("CORS middleware configured with origins: %s", configured_origins)

app.add_middleware(
    CORSMiddleware,
    allow_origins=configured_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def run_bench_job(run_id: str, request: BenchRequest) -> None:
    """Background task: run the benchmark and store the report (or the failure)."""
    database.update_run_status(run_id, "running")
    try:
        spec = RunSpec(
            instances=discover_instances(request.directory),
            root=request.directory,
            timeout=request.timeout,
            conflict_budget=request.conflicts,
            config=SolverConfig(crvr_enabled=request.crvr, crvr_k=request.k, crvr_q=request.q, seed=request.seed),
            seed=request.seed,
            jobs=request.jobs,
        )
        report = run_comparison(spec) if request.compare_crvr else run_benchmark(spec)
        database.save_report(run_id, report, directory=request.directory)
    except Exception as e:
        logger.exception("Benchmark run %s failed", run_id)
        database.update_run_status(run_id, "failed", error=str(e))


@app.get("/")
def read_root():
    return {"Project": "CDCL solver", "Status": "Running"}


@app.post("/solve", response_model=SolveResponse)
def solve_instance(request: SolveRequest):
    if len(request.dimacs) > MAX_DIMACS_BYTES:
        raise HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail="DIMACS text too large")
    try:
        formula = parse_dimacs(request.dimacs)
    except DimacsParseError as e:
        raise HTTPException(status_code=400, detail=str(e))
    timeout = min(request.timeout or SOLVE_TIMEOUT_CAP_SEC, SOLVE_TIMEOUT_CAP_SEC)
    cfg = SolverConfig(crvr_enabled=request.crvr, crvr_k=request.k, crvr_q=request.q, seed=request.seed,
                       conflict_budget=request.conflicts, time_budget=timeout)
    result = solve(formula, cfg)
    logger.info("POST /solve: %s (%d vars, %d conflicts)", result.outcome.value, formula.num_vars, result.stats.c)
    model = result.model.dimacs() if result.outcome is Outcome.SAT else None
    return SolveResponse(outcome=result.outcome.value, model=model, stats=result.stats)


@app.post("/bench", response_model=BenchAccepted, status_code=status.HTTP_202_ACCEPTED)
def start_bench(request: BenchRequest, background_tasks: BackgroundTasks):
    try:
        discover_instances(request.directory)
    except FileNotFoundError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    run_id = uuid.uuid4().hex
    kind = "comparison" if request.compare_crvr else "single"
    database.create_run(run_id, request.directory, kind=kind)
    background_tasks.add_task(run_bench_job, run_id, request)
    return BenchAccepted(run_id=run_id, status="queued")


@app.get("/bench/{run_id}")
def get_bench(run_id: str):
    record = database.load_report(run_id)
    if record is None:
        raise HTTPException(status_code=404, detail="Run not found")
    return record


@app.get("/runs")
def get_runs() -> List[dict]:
    return database.list_runs()
