# models.py
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

STATS_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1


# --- Solver Configuration ---
class SolverConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    restart_unit: int = Field(128, ge=1)
    reduce_base: int = Field(2000, ge=1)
    reduce_increment: int = Field(300, ge=0)
    var_decay: float = Field(0.95, gt=0, lt=1)
    clause_decay: float = Field(0.999, gt=0, lt=1)
    crvr_enabled: bool = False
    crvr_k: int = Field(50, ge=1)
    crvr_q: float = Field(0.1, gt=0, lt=1)
    seed: int = 0
    random_var_freq: float = Field(0.0, ge=0, le=1)
    conflict_budget: Optional[int] = Field(None, ge=0)
    time_budget: Optional[float] = Field(None, gt=0)
    deadline_check_interval: int = Field(1024, ge=1)
    max_tracked_burst: int = Field(10, ge=2)
    minimize: bool = True
    check_invariants: bool = False


# --- Run Statistics ---
class RunStats(BaseModel):
    """Aggregates for one solver run. Ratios whose denominator is zero are None."""
    model_config = ConfigDict(frozen=True)

    schema_version: int = STATS_SCHEMA_VERSION
    outcome: str = "UNKNOWN"
    wall_time: float = 0.0

    d: int = 0
    c: int = 0
    s: int = 0
    m: int = 0
    c_s: int = 0
    c_m: int = 0
    no_conflict_decisions: int = 0

    sum_lbd: int = 0
    sum_lbd_sc: int = 0
    sum_lbd_mc: int = 0
    sum_min_lbd_mc: int = 0
    glue_count: int = 0

    count_b: Dict[int, int] = Field(default_factory=dict)
    max_burst: int = 0
    burst_overflow: int = 0
    burst_overflow_conflicts: int = 0

    cp_mc_samples: int = 0
    cp_sc_samples: int = 0
    cp_mc_mean: Optional[float] = None
    cp_sc_mean: Optional[float] = None

    pdsc: Optional[float] = None
    pdmc: Optional[float] = None
    glr: Optional[float] = None
    g2l: Optional[float] = None
    albd: Optional[float] = None
    albd_sc: Optional[float] = None
    albd_mc: Optional[float] = None
    avg_min_lbd_mc: Optional[float] = None
    avg_burst: Optional[float] = None

    restarts: int = 0
    reductions: int = 0
    learned_literals: int = 0
    claim1_checked: int = 0
    claim1_violations: int = 0
    claim1_level_violations: int = 0
    crvr_flagged: int = 0
    crvr_reductions: int = 0
    poor_mc_decisions: int = 0

    def flat(self, tracked_bursts: int = 10) -> Dict[str, object]:
        """Flat mapping for CSV/JSON: ``count_b`` becomes ``count_2 … count_N``."""
        row = self.model_dump(exclude={"count_b"})
        for b in range(2, tracked_bursts + 1):
            row[f"count_{b}"] = self.count_b.get(b, 0)
        return row


# --- Benchmark Models ---
class RunSpec(BaseModel):
    instances: List[str]
    root: Optional[str] = None
    timeout: float = Field(60.0, gt=0)
    conflict_budget: Optional[int] = Field(None, ge=0)
    config: SolverConfig = Field(default_factory=SolverConfig)
    seed: int = 0
    jobs: int = Field(1, ge=1)
    proof_dir: Optional[str] = None
    verify_proofs: bool = False


class ReportRow(BaseModel):
    instance: str
    config: str = "baseline"
    outcome: str
    wall_time: float = 0.0
    model_verified: Optional[bool] = None
    proof_verified: Optional[bool] = None
    error: Optional[str] = None
    stats: Optional[RunStats] = None

    @property
    def solved(self) -> bool:
        return self.outcome in ("SAT", "UNSAT")


class BenchmarkSummary(BaseModel):
    config: str
    instances: int
    solved_sat: int
    solved_unsat: int
    solved: int
    errors: int
    par2: float
    timeout: float


class TrendChecks(BaseModel):
    """Suite-level direction checks on the conflict analytics (not magnitudes)."""
    lbd_instances: int = 0
    albd_mc_ge_sc_share: Optional[float] = None
    mean_albd_mc: Optional[float] = None
    mean_min_lbd_mc: Optional[float] = None
    lbd_trend_holds: bool = False
    proximity_instances: int = 0
    mean_cp_mc: Optional[float] = None
    mean_cp_sc: Optional[float] = None
    proximity_trend_holds: bool = False
    burst_histogram: Dict[int, float] = Field(default_factory=dict)
    burst_violations: List[int] = Field(default_factory=list)
    burst_trend_holds: bool = False


class BenchmarkReport(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    config: str
    timeout: float
    rows: List[ReportRow]
    summary: BenchmarkSummary
    trends: Optional[TrendChecks] = None
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _rows_match_config(self):
        for row in self.rows:
            if row.config != self.config:
                raise ValueError(f"row {row.instance} belongs to {row.config}, not {self.config}")
        return self


class SubsetMetrics(BaseModel):
    """Averages over an instance subset for one configuration."""
    instances: int
    avg_glr: Optional[float] = None
    avg_albd: Optional[float] = None
    avg_g2l: Optional[float] = None


class InstanceDelta(BaseModel):
    instance: str
    baseline_outcome: str
    crvr_outcome: str
    baseline_time: float
    crvr_time: float
    time_delta: float


class ComparisonReport(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    baseline: BenchmarkReport
    crvr: BenchmarkReport
    deltas: List[InstanceDelta]
    solved_sat_delta: int
    solved_unsat_delta: int
    solved_delta: int
    par2_delta: float
    contradictions: List[str] = Field(default_factory=list)
    crvr_good: Dict[str, SubsetMetrics] = Field(default_factory=dict)
    crvr_bad: Dict[str, SubsetMetrics] = Field(default_factory=dict)


# --- HTTP Models ---
class SolveRequest(BaseModel):
    dimacs: str
    crvr: bool = False
    k: int = Field(50, ge=1)
    q: float = Field(0.1, gt=0, lt=1)
    timeout: Optional[float] = Field(None, gt=0)
    conflicts: Optional[int] = Field(None, ge=0)
    seed: int = 0


class SolveResponse(BaseModel):
    outcome: str
    model: Optional[List[int]] = None
    stats: RunStats


class BenchRequest(BaseModel):
    directory: str
    compare_crvr: bool = False
    crvr: bool = False
    timeout: float = Field(60.0, gt=0)
    conflicts: Optional[int] = Field(None, ge=0)
    jobs: int = Field(1, ge=1)
    k: int = Field(50, ge=1)
    q: float = Field(0.1, gt=0, lt=1)
    seed: int = 0

    @field_validator("directory")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("directory must not be empty")
        return value


class BenchAccepted(BaseModel):
    run_id: str
    status: str
