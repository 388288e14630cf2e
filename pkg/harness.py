# harness.py
"""Solver and benchmark CLI.

Sub-commands:
- ``solve FILE``  solve one DIMACS file, SAT-competition output and exit codes
- ``bench DIR``   run every instance in a directory, optionally baseline vs CRVR
- ``gen DIR``     write a crafted desk-scale suite (random 3-SAT + pigeonhole)
- ``history``     list stored benchmark runs, or show one
- ``serve``       start the HTTP service (main.py) under uvicorn
"""

import argparse
import csv
import json
import logging
import os
import random
import sys
import tempfile
import time
import uuid
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from dotenv import load_dotenv

import plots
from cnf import DimacsParseError, check_model, load_formula, pigeonhole, random_ksat, write_dimacs
from engine import Outcome, solve
from models import (BenchmarkReport, BenchmarkSummary, ComparisonReport, InstanceDelta, ReportRow,
                    RunSpec, RunStats, SolverConfig, SubsetMetrics, TrendChecks)
from proof import ProofWriteError, check_rup_proof, drat_trim_available, run_drat_trim

load_dotenv()
logger = logging.getLogger(__name__)

# ────────────────────────── CONFIG ───────────────────────────────────────────
DEFAULT_TIMEOUT_SEC = float(os.getenv("DEFAULT_TIMEOUT_SEC", 60))
DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", 0))
SOLVER_HOST = os.getenv("SOLVER_HOST", "127.0.0.1")
SOLVER_PORT = int(os.getenv("SOLVER_PORT", 8000))

DIMACS_SUFFIXES = (".cnf", ".dimacs", ".cnf.gz", ".cnf.xz", ".cnf.bz2")
EXIT_CODES = {Outcome.SAT: 10, Outcome.UNSAT: 20, Outcome.UNKNOWN: 0}
STATUS_LINES = {Outcome.SAT: "s SATISFIABLE", Outcome.UNSAT: "s UNSATISFIABLE", Outcome.UNKNOWN: "s UNKNOWN"}
ROW_COLUMNS = ["instance", "config", "outcome", "model_verified", "proof_verified", "error"]
SUMMARY_COLUMNS = ["config", "instances", "solved_sat", "solved_unsat", "solved", "errors", "par2", "timeout"]
THRESHOLD_RATIO = 4.26
ALBD_SHARE_MIN = 0.6
BURST_SLACK = 0.05


def configure_logging() -> None:
    kwargs = {}
    log_file = os.getenv("LOG_FILE")
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        kwargs = {"filename": log_file, "filemode": "a"}
    logging.basicConfig(level=os.getenv("LOG_LEVEL", "INFO"),
                        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s", **kwargs)


def config_label(cfg: SolverConfig) -> str:
    return "crvr" if cfg.crvr_enabled else "baseline"


def discover_instances(directory: Union[str, Path]) -> List[str]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"benchmark directory not found: {root}")
    found = sorted(str(p) for p in root.rglob("*") if p.is_file() and p.name.endswith(DIMACS_SUFFIXES))
    if not found:
        raise ValueError(f"no DIMACS instances in {root}")
    return found


def instance_name(path: Union[str, Path], root: Optional[Union[str, Path]] = None) -> str:
    """Report key for an instance: its path below ``root``, or the bare file name."""
    if root is not None:
        try:
            return Path(path).resolve().relative_to(Path(root).resolve()).as_posix()
        except ValueError:
            pass
    return Path(path).name


# ────────────────────────── SINGLE INSTANCE ──────────────────────────────────
def _verify_proof(instance: str, formula, proof_path: Path) -> bool:
    if drat_trim_available():
        if instance.endswith((".cnf", ".dimacs")):
            return run_drat_trim(instance, proof_path)
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as tmp:
            write_dimacs(formula, tmp)
        try:
            return run_drat_trim(tmp.name, proof_path)
        finally:
            os.unlink(tmp.name)
    logger.warning("drat-trim not found; checking %s with the in-process RUP checker", proof_path.name)
    return check_rup_proof(formula, proof_path.read_text())


def run_instance(spec: RunSpec, instance: str) -> ReportRow:
    """Solve one instance under the run's budgets. Never raises for bad input."""
    name = instance_name(instance, spec.root)
    label = config_label(spec.config)
    try:
        formula = load_formula(instance)
    except (DimacsParseError, OSError, EOFError) as e:
        logger.error("Cannot read %s: %s", instance, e)
        return ReportRow(instance=name, config=label, outcome="ERROR", error=str(e))

    budget = spec.conflict_budget if spec.conflict_budget is not None else spec.config.conflict_budget
    cfg = spec.config.model_copy(update={"time_budget": spec.timeout, "conflict_budget": budget,
                                         "seed": spec.seed})
    proof_path = None
    logger.info("Solving %s [%s] (%d vars, %d clauses)", name, label, formula.num_vars, len(formula.clauses))
    start = time.perf_counter()
    try:
        if spec.proof_dir:
            proof_path = Path(spec.proof_dir) / f"{name}.{label}.drat"
            proof_path.parent.mkdir(parents=True, exist_ok=True)
            with open(proof_path, "w") as sink:
                result = solve(formula, cfg, proof=sink)
        else:
            result = solve(formula, cfg)
    except (ProofWriteError, OSError) as e:
        logger.error("Run failed on %s: %s", name, e)
        return ReportRow(instance=name, config=label, outcome="ERROR", error=str(e),
                         wall_time=time.perf_counter() - start)
    wall_time = time.perf_counter() - start

    model_verified = None
    if result.outcome is Outcome.SAT:
        model_verified = check_model(formula, result.model)
    proof_verified = None
    if result.outcome is Outcome.UNSAT and proof_path is not None and spec.verify_proofs:
        proof_verified = _verify_proof(instance, formula, proof_path)
    if result.outcome is Outcome.UNKNOWN:
        logger.warning("Budget exhausted on %s after %d conflicts", name, result.stats.c)
    logger.info("Finished %s [%s]: %s in %.3fs", name, label, result.outcome.value, wall_time)
    return ReportRow(instance=name, config=label, outcome=result.outcome.value, wall_time=wall_time,
                     model_verified=model_verified, proof_verified=proof_verified, stats=result.stats)


# ────────────────────────── BENCHMARKS ───────────────────────────────────────
def counts_as_solved(row: ReportRow, timeout: float) -> bool:
    """Solved within the timeout (the deadline is checked cooperatively, so a run may overshoot)."""
    return row.solved and row.wall_time <= timeout


def par2(rows: Iterable[ReportRow], timeout: float) -> float:
    total = 0.0
    for row in rows:
        total += row.wall_time if counts_as_solved(row, timeout) else 2 * timeout
    return total


def summarize(rows: Sequence[ReportRow], config: str, timeout: float) -> BenchmarkSummary:
    solved = [r for r in rows if counts_as_solved(r, timeout)]
    return BenchmarkSummary(
        config=config,
        instances=len(rows),
        solved_sat=sum(1 for r in solved if r.outcome == "SAT"),
        solved_unsat=sum(1 for r in solved if r.outcome == "UNSAT"),
        solved=len(solved),
        errors=sum(1 for r in rows if r.outcome == "ERROR"),
        par2=par2(rows, timeout),
        timeout=timeout,
    )


def burst_violations(means: Dict[int, float]) -> List[int]:
    """Burst sizes b whose mean count rises above the mean count at b - 1."""
    sizes = sorted(means)
    return [b for prev, b in zip(sizes, sizes[1:]) if means[b] > means[prev]]


def trend_checks(rows: Sequence[ReportRow], tracked_bursts: int = 10) -> TrendChecks:
    """Direction checks over a suite.

    - LBD: aLBD_mc >= aLBD_sc on at least 60% of the instances that have both
      kinds of conflict, and the mean best-in-burst LBD stays below the mean
      aLBD_mc.
    - proximity: the mean of per-instance cp_mc exceeds that of cp_sc.
    - bursts: the mean count_b does not grow with b, apart from at most one
      rise of no more than 5% over its predecessor.
    """
    stats = [r.stats for r in rows if r.stats is not None and r.stats.c > 0]
    checks = {}

    paired = [s for s in stats if s.m > 0 and s.c_s > 0 and s.albd_mc is not None and s.albd_sc is not None]
    if paired:
        share = sum(1 for s in paired if s.albd_mc >= s.albd_sc) / len(paired)
        mean_albd = _mean([s.albd_mc for s in paired])
        mean_min = _mean([s.avg_min_lbd_mc for s in paired])
        checks.update(lbd_instances=len(paired), albd_mc_ge_sc_share=share, mean_albd_mc=mean_albd,
                      mean_min_lbd_mc=mean_min,
                      lbd_trend_holds=share >= ALBD_SHARE_MIN and mean_min is not None and mean_min < mean_albd)

    close = [s for s in stats if s.cp_mc_mean is not None and s.cp_sc_mean is not None]
    if close:
        cp_mc, cp_sc = _mean([s.cp_mc_mean for s in close]), _mean([s.cp_sc_mean for s in close])
        checks.update(proximity_instances=len(close), mean_cp_mc=cp_mc, mean_cp_sc=cp_sc,
                      proximity_trend_holds=cp_mc > cp_sc)

    if stats:
        means = {b: sum(s.count_b.get(b, 0) for s in stats) / len(stats) for b in range(2, tracked_bursts + 1)}
        rises = burst_violations(means)
        small = all(means[b] <= means[b - 1] * (1 + BURST_SLACK) for b in rises)
        checks.update(burst_histogram=means, burst_violations=rises, burst_trend_holds=len(rises) <= 1 and small)
    return TrendChecks(**checks)


def run_benchmark(spec: RunSpec) -> BenchmarkReport:
    if not spec.instances:
        raise ValueError("benchmark needs at least one instance")
    names = [instance_name(inst, spec.root) for inst in spec.instances]
    clashes = sorted(n for n, k in Counter(names).items() if k > 1)
    if clashes:
        raise ValueError(f"instances share a report name: {', '.join(clashes)}; set a benchmark root")
    label = config_label(spec.config)
    started = datetime.now(timezone.utc).isoformat()
    logger.info("Benchmark [%s]: %d instances, timeout %.1fs, %d worker(s)",
                label, len(spec.instances), spec.timeout, spec.jobs)
    if spec.jobs == 1:
        rows = [run_instance(spec, inst) for inst in spec.instances]
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(run_instance, [spec] * len(spec.instances), spec.instances))
    summary = summarize(rows, label, spec.timeout)
    logger.info("Benchmark [%s] done: %d/%d solved (SAT %d, UNSAT %d), PAR-2 %.2f",
                label, summary.solved, summary.instances, summary.solved_sat, summary.solved_unsat, summary.par2)
    metadata = {"started_at": started, "finished_at": datetime.now(timezone.utc).isoformat(),
                "jobs": str(spec.jobs), "seed": str(spec.seed)}
    return BenchmarkReport(config=label, timeout=spec.timeout, rows=rows, summary=summary,
                           trends=trend_checks(rows), metadata=metadata)


def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return sum(present) / len(present) if present else None


def subset_metrics(rows: Sequence[ReportRow]) -> SubsetMetrics:
    stats = [r.stats for r in rows if r.stats is not None]
    return SubsetMetrics(instances=len(rows),
                         avg_glr=_mean([s.glr for s in stats]),
                         avg_albd=_mean([s.albd for s in stats]),
                         avg_g2l=_mean([s.g2l for s in stats]))


def compare_reports(baseline: BenchmarkReport, crvr: BenchmarkReport) -> ComparisonReport:
    base_rows = {r.instance: r for r in baseline.rows}
    crvr_rows = {r.instance: r for r in crvr.rows}
    if base_rows.keys() != crvr_rows.keys():
        raise ValueError("paired reports must cover the same instances")
    timeout = baseline.timeout

    deltas, contradictions = [], []
    good, bad = [], []
    for name in sorted(base_rows):
        b, c = base_rows[name], crvr_rows[name]
        deltas.append(InstanceDelta(instance=name, baseline_outcome=b.outcome, crvr_outcome=c.outcome,
                                    baseline_time=b.wall_time, crvr_time=c.wall_time,
                                    time_delta=c.wall_time - b.wall_time))
        if {b.outcome, c.outcome} == {"SAT", "UNSAT"}:
            contradictions.append(name)
            logger.error("Contradicting outcomes on %s: baseline %s, crvr %s", name, b.outcome, c.outcome)
        solved_b, solved_c = counts_as_solved(b, timeout), counts_as_solved(c, timeout)
        if solved_c and not solved_b:
            good.append(name)
        elif solved_b and not solved_c:
            bad.append(name)

    def split(names: List[str]) -> Dict[str, SubsetMetrics]:
        return {"baseline": subset_metrics([base_rows[n] for n in names]),
                "crvr": subset_metrics([crvr_rows[n] for n in names])}

    bs, cs = baseline.summary, crvr.summary
    return ComparisonReport(
        baseline=baseline, crvr=crvr, deltas=deltas,
        solved_sat_delta=cs.solved_sat - bs.solved_sat,
        solved_unsat_delta=cs.solved_unsat - bs.solved_unsat,
        solved_delta=cs.solved - bs.solved,
        par2_delta=cs.par2 - bs.par2,
        contradictions=contradictions,
        crvr_good=split(good), crvr_bad=split(bad),
    )


def run_comparison(spec: RunSpec) -> ComparisonReport:
    baseline = run_benchmark(spec.model_copy(update={"config": spec.config.model_copy(update={"crvr_enabled": False})}))
    crvr = run_benchmark(spec.model_copy(update={"config": spec.config.model_copy(update={"crvr_enabled": True})}))
    return compare_reports(baseline, crvr)


# ────────────────────────── REPORTS ──────────────────────────────────────────
def format_table(report: Union[BenchmarkReport, ComparisonReport]) -> str:
    """Solved SAT/UNSAT/total and PAR-2 per configuration, plus deltas for pairs."""
    lines = [f"{'config':<16}{'SAT':>8}{'UNSAT':>8}{'total':>8}{'PAR-2':>14}"]

    def line(label, sat, unsat, total, score):
        lines.append(f"{label:<16}{sat:>8}{unsat:>8}{total:>8}{score:>14.2f}")

    if isinstance(report, ComparisonReport):
        for s in (report.baseline.summary, report.crvr.summary):
            line(s.config, s.solved_sat, s.solved_unsat, s.solved, s.par2)
        line("delta", f"{report.solved_sat_delta:+d}", f"{report.solved_unsat_delta:+d}",
             f"{report.solved_delta:+d}", report.par2_delta)
        for title, subset in (("solved only with CRVR", report.crvr_good),
                              ("solved only by baseline", report.crvr_bad)):
            n = subset["baseline"].instances if subset else 0
            lines.append(f"\n{title}: {n} instance(s)")
            for cfg_name, m in subset.items():
                lines.append(f"  {cfg_name:<10} GLR {_fmt(m.avg_glr)}  aLBD {_fmt(m.avg_albd)}  G2L {_fmt(m.avg_g2l)}")
        if report.contradictions:
            lines.append(f"\nCONTRADICTIONS: {', '.join(report.contradictions)}")
    else:
        s = report.summary
        line(s.config, s.solved_sat, s.solved_unsat, s.solved, s.par2)
    reports = [report.baseline, report.crvr] if isinstance(report, ComparisonReport) else [report]
    for r in reports:
        if r.trends is not None:
            lines.extend(trend_lines(r.config, r.trends))
    return "\n".join(lines)


def trend_lines(config: str, t: TrendChecks) -> List[str]:
    def verdict(ok: bool, n: int) -> str:
        return "n/a" if n == 0 else ("holds" if ok else "fails")

    head = " ".join(f"{t.burst_histogram[b]:.1f}" for b in sorted(t.burst_histogram))
    return [
        f"\ntrends [{config}]",
        f"  LBD        {verdict(t.lbd_trend_holds, t.lbd_instances):<6} share mc>=sc {_fmt(t.albd_mc_ge_sc_share)}"
        f"  min-LBD mc {_fmt(t.mean_min_lbd_mc)}  aLBD mc {_fmt(t.mean_albd_mc)}  ({t.lbd_instances} inst.)",
        f"  proximity  {verdict(t.proximity_trend_holds, t.proximity_instances):<6} cp mc {_fmt(t.mean_cp_mc)}"
        f"  cp sc {_fmt(t.mean_cp_sc)}  ({t.proximity_instances} inst.)",
        f"  bursts     {verdict(t.burst_trend_holds, len(t.burst_histogram)):<6} count_2.. {head}",
    ]


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.3f}"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def stats_columns(tracked_bursts: int = 10) -> List[str]:
    return [k for k in RunStats().flat(tracked_bursts) if k not in ("wall_time", "outcome")]


def write_rows_csv(path: Union[str, Path], rows: Sequence[ReportRow], tracked_bursts: int = 10) -> None:
    """Main CSV holds no timings, so identical runs give identical files;
    wall times go to the ``*_timing.csv`` sibling."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = stats_columns(tracked_bursts)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ROW_COLUMNS + columns)
        for row in rows:
            flat = row.stats.flat(tracked_bursts) if row.stats else {}
            w.writerow([_cell(getattr(row, c)) for c in ROW_COLUMNS] + [_cell(flat.get(c)) for c in columns])

    timing_path = path.with_name(f"{path.stem}_timing{path.suffix or '.csv'}")
    with open(timing_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["instance", "config", "outcome", "wall_time"])
        for row in rows:
            w.writerow([row.instance, row.config, row.outcome, f"{row.wall_time:.6f}"])


def write_summary_csv(path: Union[str, Path], report: Union[BenchmarkReport, ComparisonReport]) -> None:
    path = Path(path)
    summary_path = path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")
    with open(summary_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        if isinstance(report, ComparisonReport):
            summaries = [report.baseline.summary, report.crvr.summary]
        else:
            summaries = [report.summary]
        for s in summaries:
            w.writerow([getattr(s, c) if c != "par2" else f"{s.par2:.6f}" for c in SUMMARY_COLUMNS])
        if isinstance(report, ComparisonReport):
            w.writerow(["delta", "", report.solved_sat_delta, report.solved_unsat_delta,
                        report.solved_delta, "", f"{report.par2_delta:.6f}", ""])


def write_plots(report: Union[BenchmarkReport, ComparisonReport], plots_dir: Union[str, Path],
                tracked_bursts: int = 10) -> List[Path]:
    out = Path(plots_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    reports = [report.baseline, report.crvr] if isinstance(report, ComparisonReport) else [report]
    for rep in reports:
        tag = rep.config
        written.append(plots.plot_lbd_profile(rep.rows, out / f"lbd_profile_{tag}.svg", title=f"LBD profile ({tag})"))
        written.append(plots.plot_burst_histogram(rep.rows, out / f"burst_histogram_{tag}.svg", tracked_bursts,
                                                  title=f"mc decisions by burst ({tag})"))
        written.append(plots.plot_proximity(rep.rows, out / f"proximity_{tag}.svg", title=f"cp mc vs sc ({tag})"))
        written.append(plots.plot_burst_extent(rep.rows, out / f"burst_extent_{tag}.svg", title=f"Burst size ({tag})"))
    if isinstance(report, ComparisonReport):
        written.append(plots.plot_solved_delta(report.baseline.rows, report.crvr.rows, out / "solved_delta.svg"))
    return written


def emit_report(report: Union[BenchmarkReport, ComparisonReport], csv_path: Optional[str] = None,
                json_path: Optional[str] = None, plots_dir: Optional[str] = None,
                tracked_bursts: int = 10) -> List[Path]:
    """Write the requested formats; returns the files written."""
    written = []
    if csv_path:
        rows = report.baseline.rows + report.crvr.rows if isinstance(report, ComparisonReport) else report.rows
        write_rows_csv(csv_path, rows, tracked_bursts)
        write_summary_csv(csv_path, report)
        p = Path(csv_path)
        written += [p, p.with_name(f"{p.stem}_timing{p.suffix or '.csv'}"),
                    p.with_name(f"{p.stem}_summary{p.suffix or '.csv'}")]
    if json_path:
        p = Path(json_path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(report.model_dump_json(indent=2))
        written.append(p)
    if plots_dir:
        written += write_plots(report, plots_dir, tracked_bursts)
    for p in written:
        logger.info("Wrote %s", p)
    return written


# ────────────────────────── CRAFTED SUITE ────────────────────────────────────
def generate_suite(directory: Union[str, Path], count: int = 20, num_vars: int = 50,
                   seed: int = 0, pigeons: Sequence[int] = (5, 6, 7)) -> List[Path]:
    """Random 3-SAT at the threshold ratio plus PHP(p, p-1) instances."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    num_clauses = round(num_vars * THRESHOLD_RATIO)
    written = []
    for i in range(count):
        f = random_ksat(num_vars, num_clauses, 3, rng)
        path = out / f"rand3_n{num_vars}_{i:03d}.cnf"
        with open(path, "w") as sink:
            write_dimacs(f, sink, comments=[f"random 3-SAT n={num_vars} m={num_clauses} seed={seed} index={i}"])
        written.append(path)
    for p in pigeons:
        path = out / f"php_{p}_{p - 1}.cnf"
        with open(path, "w") as sink:
            write_dimacs(pigeonhole(p, p - 1), sink, comments=[f"pigeonhole {p} pigeons {p - 1} holes"])
        written.append(path)
    logger.info("Wrote %d instances to %s", len(written), out)
    return written


# ────────────────────────── CLI ──────────────────────────────────────────────
def _solver_config(args) -> SolverConfig:
    return SolverConfig(crvr_enabled=args.crvr, crvr_k=args.k, crvr_q=args.q, seed=args.seed,
                        conflict_budget=args.conflicts, time_budget=args.timeout)


def model_lines(model_lits: List[int], per_line: int = 10) -> List[str]:
    lits = [str(x) for x in model_lits] + ["0"]
    return ["v " + " ".join(lits[i:i + per_line]) for i in range(0, len(lits), per_line)]


def cmd_solve(args) -> int:
    try:
        formula = load_formula(args.file)
    except (DimacsParseError, OSError, EOFError) as e:
        logger.error("Cannot read %s: %s", args.file, e)
        return 1
    cfg = _solver_config(args)
    try:
        if args.proof:
            with open(args.proof, "w") as sink:
                result = solve(formula, cfg, proof=sink)
        else:
            result = solve(formula, cfg)
    except ProofWriteError as e:
        logger.error("%s", e)
        return 1
    print(STATUS_LINES[result.outcome])
    if result.outcome is Outcome.SAT:
        print("\n".join(model_lines(result.model.dimacs())))
    if args.stats:
        Path(args.stats).write_text(result.stats.model_dump_json(indent=2))
    logger.info("%s: %s, %d conflicts, %d decisions, %.3fs", args.file, result.outcome.value,
                result.stats.c, result.stats.d, result.stats.wall_time)
    return EXIT_CODES[result.outcome]


def cmd_bench(args) -> int:
    import database

    try:
        instances = discover_instances(args.directory)
    except (FileNotFoundError, ValueError) as e:
        logger.error("%s", e)
        return 1
    spec = RunSpec(instances=instances, root=args.directory, timeout=args.timeout, conflict_budget=args.conflicts,
                   config=SolverConfig(crvr_enabled=args.crvr, crvr_k=args.k, crvr_q=args.q, seed=args.seed),
                   seed=args.seed, jobs=args.jobs, proof_dir=args.proof_dir, verify_proofs=args.verify_proofs)
    report = run_comparison(spec) if args.compare_crvr else run_benchmark(spec)
    emit_report(report, csv_path=args.csv, json_path=args.json, plots_dir=args.plots)
    print(format_table(report))
    if not args.no_db:
        database.initialize_db()
        run_id = uuid.uuid4().hex
        database.save_report(run_id, report, directory=str(args.directory))
        print(f"\nrun id: {run_id}")
    if isinstance(report, ComparisonReport) and report.contradictions:
        return 2
    return 0


def cmd_gen(args) -> int:
    generate_suite(args.directory, count=args.count, num_vars=args.vars, seed=args.seed,
                   pigeons=args.pigeons)
    return 0


def cmd_history(args) -> int:
    import database

    database.initialize_db()
    if args.instance:
        entries = database.instance_history(args.instance)
        if not entries:
            print(f"No stored results for {args.instance}.")
        for e in entries:
            print(f"{e['run_id']}  {e['created_at']}  {e['config']:<9} {e['outcome']:<8} {e['wall_time']:.3f}s")
        return 0
    if args.run_id:
        record = database.load_report(args.run_id)
        if record is None:
            logger.error("Unknown run id %s", args.run_id)
            return 1
        print(json.dumps({k: v for k, v in record.items() if k != "report"}, indent=2))
        if record["report"]:
            report_cls = ComparisonReport if record["kind"] == "comparison" else BenchmarkReport
            print(format_table(report_cls.model_validate(record["report"])))
        return 0
    runs = database.list_runs()
    if not runs:
        print("No benchmark runs stored yet.")
    for run in runs:
        par2_text = "-" if run["par2"] is None else f"{run['par2']:.2f}"
        print(f"{run['run_id']}  {run['created_at']}  {run['status']:<8} {run['kind']:<10} "
              f"solved={run['solved'] if run['solved'] is not None else '-'}  PAR-2={par2_text}  {run['directory'] or ''}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port, log_level=os.getenv("LOG_LEVEL", "info").lower())
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--crvr", action="store_true", help="Enable Common Reason Variable Reduction branching.")
    p.add_argument("--k", type=int, default=50, help="Window of recent LBDs for the poor-decision threshold.")
    p.add_argument("--q", type=float, default=0.1, help="Activity reduction factor for flagged variables.")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT_SEC, help="Per-instance time budget in seconds.")
    p.add_argument("--conflicts", type=int, default=None, help="Per-instance conflict budget.")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="CDCL SAT solver with sc/mc conflict analytics and CRVR branching.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Solve one DIMACS CNF file.")
    p.add_argument("file")
    _add_solver_flags(p)
    p.add_argument("--proof", help="Write a DRAT proof to this file.")
    p.add_argument("--stats", help="Write run statistics (JSON) to this file.")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="Benchmark every DIMACS file in a directory.")
    p.add_argument("directory")
    _add_solver_flags(p)
    p.add_argument("--compare-crvr", action="store_true", help="Run baseline and CRVR on the same instances.")
    p.add_argument("--jobs", type=int, default=1, help="Worker processes.")
    p.add_argument("--csv", help="Per-instance CSV (plus *_timing.csv and *_summary.csv siblings).")
    p.add_argument("--json", help="Full report as JSON.")
    p.add_argument("--plots", help="Directory for SVG plots.")
    p.add_argument("--proof-dir", help="Write a DRAT proof per instance into this directory.")
    p.add_argument("--verify-proofs", action="store_true", help="Check UNSAT proofs (drat-trim if available).")
    p.add_argument("--no-db", action="store_true", help="Do not store the run in the SQLite history.")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="Write a crafted desk-scale benchmark suite.")
    p.add_argument("directory")
    p.add_argument("--count", type=int, default=20, help="Random 3-SAT instances.")
    p.add_argument("--vars", type=int, default=50)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--pigeons", type=int, nargs="*", default=[5, 6, 7], help="PHP(p, p-1) sizes.")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("history", help="List stored benchmark runs, or show one.")
    p.add_argument("run_id", nargs="?")
    p.add_argument("--instance", help="Show every stored result for one instance file name.")
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("serve", help="Start the HTTP service.")
    p.add_argument("--host", default=SOLVER_HOST)
    p.add_argument("--port", type=int, default=SOLVER_PORT)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
