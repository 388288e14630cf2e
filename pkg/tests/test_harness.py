import csv
import shutil
from pathlib import Path
from unittest import mock

import pytest

import harness
import plots
from cnf import pigeonhole, write_dimacs
from models import BenchmarkReport, ReportRow, RunSpec, RunStats, SolverConfig


def row(outcome, wall_time, instance="x.cnf", config="baseline", **stats):
    return ReportRow(instance=instance, config=config, outcome=outcome, wall_time=wall_time,
                     stats=RunStats(outcome=outcome, **stats) if stats else None)


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def php(directory: Path, pigeons: int, name=None) -> Path:
    path = directory / (name or f"php_{pigeons}.cnf")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as sink:
        write_dimacs(pigeonhole(pigeons, pigeons - 1), sink)
    return path


def report_of(config, rows, timeout=10):
    return BenchmarkReport(config=config, timeout=timeout, rows=rows,
                           summary=harness.summarize(rows, config, timeout))


@pytest.fixture
def run_main(capsys):
    def _run(*argv):
        code = harness.main(list(argv))
        return code, capsys.readouterr().out
    return _run


# --- single instances ---
def test_run_instance_unsat(fixtures_dir):
    r = harness.run_instance(RunSpec(instances=[], timeout=30), str(fixtures_dir / "unsat_units.cnf"))
    assert r.outcome == "UNSAT"
    assert r.instance == "unsat_units.cnf"
    assert r.model_verified is None


def test_run_instance_sat_model_is_verified(fixtures_dir):
    r = harness.run_instance(RunSpec(instances=[], timeout=30), str(fixtures_dir / "sat_small.cnf"))
    assert r.outcome == "SAT"
    assert r.model_verified
    assert r.stats.outcome == "SAT"


def test_malformed_file_gives_error_row(tmp_path):
    bad = write(tmp_path / "bad.cnf", "p cnf 2 1\n3 0\n")
    r = harness.run_instance(RunSpec(instances=[]), str(bad))
    assert r.outcome == "ERROR"
    assert "exceeds" in r.error
    assert r.stats is None


def test_missing_file_gives_error_row(tmp_path):
    assert harness.run_instance(RunSpec(instances=[]), str(tmp_path / "nope.cnf")).outcome == "ERROR"


def test_conflict_budget_gives_unknown(tmp_path):
    r = harness.run_instance(RunSpec(instances=[], conflict_budget=1), str(php(tmp_path, 5)))
    assert r.outcome == "UNKNOWN"
    assert r.stats.c == 1


def test_proof_is_written_and_checked(tmp_path):
    spec = RunSpec(instances=[], proof_dir=str(tmp_path / "proofs"), verify_proofs=True)
    with mock.patch("harness.drat_trim_available", return_value=False):
        r = harness.run_instance(spec, str(php(tmp_path, 4)))
    assert r.outcome == "UNSAT"
    assert r.proof_verified
    assert (tmp_path / "proofs" / "php_4.cnf.baseline.drat").exists()


# --- scoring ---
def test_par2():
    rows = [row("SAT", 10.0), row("UNSAT", 20.0), row("UNKNOWN", 100.0)]
    assert harness.par2(rows, 100.0) == pytest.approx(230.0)
    assert harness.par2(rows[:2], 100.0) == pytest.approx(30.0)


def test_errors_count_as_unsolved():
    assert harness.par2([row("ERROR", 0.0)], 50.0) == pytest.approx(100.0)


def test_solved_over_timeout_counts_as_unsolved():
    late = row("SAT", 51.0)
    assert not harness.counts_as_solved(late, 50.0)
    assert harness.par2([late], 50.0) == pytest.approx(100.0)


def test_summary():
    rows = [row("SAT", 1.0), row("UNSAT", 2.0), row("UNKNOWN", 9.0), row("ERROR", 0.0)]
    s = harness.summarize(rows, "baseline", 5.0)
    assert (s.solved_sat, s.solved_unsat, s.solved, s.errors, s.instances) == (1, 1, 2, 1, 4)
    assert s.par2 == pytest.approx(23.0)


# --- discovery and naming ---
def test_empty_directory(tmp_path):
    with pytest.raises(ValueError):
        harness.discover_instances(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        harness.discover_instances(tmp_path / "missing")


def test_sorted_and_filtered(tmp_path):
    write(tmp_path / "b.cnf", "p cnf 1 1\n1 0\n")
    write(tmp_path / "sub" / "a.cnf.gz", "")
    write(tmp_path / "notes.txt", "")
    assert [Path(p).name for p in harness.discover_instances(tmp_path)] == ["b.cnf", "a.cnf.gz"]


def test_generated_suite(tmp_path):
    written = harness.generate_suite(tmp_path / "suite", count=3, num_vars=10, seed=1, pigeons=(3,))
    assert len(written) == 4
    assert len(harness.discover_instances(tmp_path / "suite")) == 4
    again = harness.generate_suite(tmp_path / "again", count=3, num_vars=10, seed=1, pigeons=(3,))
    assert written[0].read_text() == again[0].read_text()


def test_instance_name_is_relative_to_root(tmp_path):
    path = tmp_path / "suite" / "unsat" / "inst.cnf"
    assert harness.instance_name(path, tmp_path / "suite") == "unsat/inst.cnf"
    assert harness.instance_name(path) == "inst.cnf"
    assert harness.instance_name(path, tmp_path / "elsewhere") == "inst.cnf"


@pytest.fixture
def same_named_suite(tmp_path, fixtures_dir):
    """``inst.cnf`` twice: satisfiable under sat/, pigeonhole under unsat/."""
    suite = tmp_path / "suite"
    (suite / "sat").mkdir(parents=True)
    shutil.copy(fixtures_dir / "sat_small.cnf", suite / "sat" / "inst.cnf")
    php(suite / "unsat", 4, name="inst.cnf")
    return suite


def test_same_file_name_in_two_directories_stays_apart(same_named_suite, tmp_path):
    spec = RunSpec(instances=harness.discover_instances(same_named_suite), root=str(same_named_suite),
                   timeout=60, proof_dir=str(tmp_path / "proofs"))
    report = harness.run_comparison(spec)
    assert report.contradictions == []
    assert [(d.instance, d.baseline_outcome, d.crvr_outcome) for d in report.deltas] == [
        ("sat/inst.cnf", "SAT", "SAT"), ("unsat/inst.cnf", "UNSAT", "UNSAT")]
    assert report.baseline.summary.instances == 2
    assert (report.baseline.summary.solved_sat, report.baseline.summary.solved_unsat) == (1, 1)
    assert (tmp_path / "proofs" / "unsat" / "inst.cnf.crvr.drat").exists()


def test_same_file_name_without_root_is_rejected(same_named_suite):
    spec = RunSpec(instances=harness.discover_instances(same_named_suite), timeout=60)
    with pytest.raises(ValueError, match="inst.cnf"):
        harness.run_benchmark(spec)


def test_bench_cli_keeps_same_named_files_apart(same_named_suite, run_main):
    code, out = run_main("bench", str(same_named_suite), "--compare-crvr", "--no-db")
    assert code == 0
    assert "CONTRADICTIONS" not in out


# --- trend checks ---
def trend_rows():
    return [
        row("SAT", 1.0, instance="a", c=10, m=2, c_s=3, albd_mc=6.0, albd_sc=4.0, avg_min_lbd_mc=3.0,
            cp_mc_mean=0.5, cp_sc_mean=0.3, count_b={2: 5, 3: 3, 4: 1}),
        row("SAT", 1.0, instance="b", c=10, m=1, c_s=2, albd_mc=3.0, albd_sc=5.0, avg_min_lbd_mc=2.0,
            cp_mc_mean=0.4, cp_sc_mean=0.2, count_b={2: 4, 3: 2}),
        row("UNSAT", 1.0, instance="c", c=8, m=1, c_s=1, albd_mc=7.0, albd_sc=2.0, avg_min_lbd_mc=5.0,
            count_b={2: 3, 3: 1}),
    ]


def test_trend_checks_on_well_behaved_rows():
    t = harness.trend_checks(trend_rows())
    assert t.lbd_instances == 3
    assert t.albd_mc_ge_sc_share == pytest.approx(2 / 3)
    assert t.mean_min_lbd_mc == pytest.approx(10 / 3)
    assert t.mean_albd_mc == pytest.approx(16 / 3)
    assert t.lbd_trend_holds
    assert t.proximity_instances == 2
    assert (t.mean_cp_mc, t.mean_cp_sc) == (pytest.approx(0.45), pytest.approx(0.25))
    assert t.proximity_trend_holds
    assert t.burst_histogram[2] == pytest.approx(4.0)
    assert t.burst_histogram[3] == pytest.approx(2.0)
    assert t.burst_histogram[10] == 0.0
    assert t.burst_violations == []
    assert t.burst_trend_holds


def test_trend_checks_detect_failures():
    rows = [row("SAT", 1.0, c=5, m=1, c_s=1, albd_mc=2.0, albd_sc=4.0, avg_min_lbd_mc=2.0,
                cp_mc_mean=0.1, cp_sc_mean=0.3, count_b={2: 100, 3: 110})]
    t = harness.trend_checks(rows)
    assert t.albd_mc_ge_sc_share == 0.0
    assert not t.lbd_trend_holds
    assert not t.proximity_trend_holds
    assert t.burst_violations == [3]
    assert not t.burst_trend_holds


@pytest.mark.parametrize("count_b, holds", [
    ({2: 100, 3: 104}, True),
    ({2: 100, 3: 110}, False),
    ({2: 100, 3: 101, 4: 50, 5: 51}, False),
])
def test_burst_trend_tolerates_one_small_rise(count_b, holds):
    t = harness.trend_checks([row("SAT", 1.0, c=1, count_b=count_b)])
    assert t.burst_trend_holds is holds


def test_trend_checks_without_data():
    t = harness.trend_checks([row("ERROR", 0.0), row("SAT", 0.1, c=0)])
    assert t.lbd_instances == 0
    assert t.albd_mc_ge_sc_share is None
    assert t.burst_histogram == {}
    assert not (t.lbd_trend_holds or t.proximity_trend_holds or t.burst_trend_holds)


def test_burst_violations():
    assert harness.burst_violations({2: 5.0, 3: 6.0, 4: 2.0, 5: 2.5}) == [3, 5]
    assert harness.burst_violations({}) == []


def test_trends_on_generated_suite(tmp_path):
    harness.generate_suite(tmp_path, count=12, num_vars=75, seed=7, pigeons=(5, 6))
    spec = RunSpec(instances=harness.discover_instances(tmp_path), root=str(tmp_path),
                   timeout=300, conflict_budget=3000)
    report = harness.run_benchmark(spec)
    t = report.trends
    assert t is not None
    assert t.lbd_instances > 0
    assert t.mean_min_lbd_mc < t.mean_albd_mc
    assert t.lbd_trend_holds
    h = t.burst_histogram
    assert h[2] >= h[3] >= h[4]
    # proximity is reported only; at this scale it does not reliably favour mc
    assert t.proximity_instances > 0
    assert "trends [baseline]" in harness.format_table(report)


# --- reports ---
@pytest.fixture
def suite_spec(tmp_path):
    harness.generate_suite(tmp_path / "suite", count=4, num_vars=20, seed=3, pigeons=(4,))
    return RunSpec(instances=harness.discover_instances(tmp_path / "suite"), root=str(tmp_path / "suite"),
                   timeout=60, config=SolverConfig(crvr_k=5))


def test_csv_has_header_and_one_row_per_instance(tmp_path, fixtures_dir):
    report = harness.run_benchmark(RunSpec(instances=[str(fixtures_dir / "sat_small.cnf")]))
    csv_path = tmp_path / "out" / "rows.csv"
    harness.emit_report(report, csv_path=str(csv_path))
    with open(csv_path) as f:
        table = list(csv.reader(f))
    assert len(table) == 2
    assert table[0][:3] == ["instance", "config", "outcome"]
    assert "count_10" in table[0]
    assert "wall_time" not in table[0]
    assert table[1][:3] == ["sat_small.cnf", "baseline", "SAT"]
    assert (tmp_path / "out" / "rows_timing.csv").exists()
    assert (tmp_path / "out" / "rows_summary.csv").exists()


def test_identical_runs_give_identical_csv(tmp_path, suite_spec):
    for name in ("a.csv", "b.csv"):
        harness.write_rows_csv(tmp_path / name, harness.run_benchmark(suite_spec).rows)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_comparison_with_plots_and_json(tmp_path, suite_spec):
    report = harness.run_comparison(suite_spec)
    assert report.contradictions == []
    assert len(report.deltas) == 5
    assert report.baseline.summary.instances == 5
    assert report.solved_delta == report.crvr.summary.solved - report.baseline.summary.solved
    written = harness.emit_report(report, json_path=str(tmp_path / "r.json"), plots_dir=str(tmp_path / "plots"))
    names = {p.name for p in written}
    assert {"solved_delta.svg", "burst_histogram_crvr.svg", "lbd_profile_baseline.svg"} <= names
    assert all(p.stat().st_size > 0 for p in written)
    table = harness.format_table(report)
    assert "delta" in table
    assert "solved only with CRVR" in table
    assert "trends [crvr]" in table


def test_contradiction_is_flagged():
    base = report_of("baseline", [row("SAT", 1.0)])
    crvr = report_of("crvr", [row("UNSAT", 1.0, config="crvr")])
    assert harness.compare_reports(base, crvr).contradictions == ["x.cnf"]


def test_crvr_only_subset():
    base = report_of("baseline", [row("UNKNOWN", 10.0, glr=2.0, albd=5.0, g2l=0.1)])
    crvr = report_of("crvr", [row("SAT", 3.0, config="crvr", glr=1.0, albd=4.0, g2l=0.3)])
    cmp = harness.compare_reports(base, crvr)
    assert cmp.crvr_good["crvr"].instances == 1
    assert cmp.crvr_good["crvr"].avg_glr == 1.0
    assert cmp.crvr_good["baseline"].avg_albd == 5.0
    assert cmp.crvr_bad["crvr"].instances == 0
    assert cmp.solved_delta == 1
    assert cmp.par2_delta == pytest.approx(3.0 - 20.0)


# --- plot data ---
def test_solved_delta_curve_starts_at_zero():
    times, deltas = plots.solved_delta_curve([row("SAT", 2.0), row("UNKNOWN", 9.0)],
                                             [row("SAT", 1.0), row("UNSAT", 3.0)])
    assert times[0] == 0.0
    assert deltas[0] == 0
    assert deltas[-1] == 1


def test_burst_histogram_keys():
    rows = [row("SAT", 1.0, count_b={2: 4, 3: 1}), row("SAT", 1.0, count_b={2: 2})]
    data = plots.burst_histogram_data(rows)
    assert sorted(data) == list(range(2, 11))
    assert data[2] == 3.0
    assert data[10] == 0.0


def test_lbd_profile_skips_incomplete_rows():
    rows = [row("SAT", 1.0, instance="a", albd_sc=2.0, albd_mc=6.0, avg_min_lbd_mc=4.0),
            row("SAT", 1.0, instance="b", albd_sc=2.0),
            row("SAT", 1.0, instance="c", albd_sc=1.0, albd_mc=3.0, avg_min_lbd_mc=2.0)]
    assert [p[0] for p in plots.lbd_profile_data(rows)] == ["c", "a"]


# --- CLI ---
def test_solve_sat(tmp_path, fixtures_dir, run_main):
    stats_path = tmp_path / "stats.json"
    code, out = run_main("solve", str(fixtures_dir / "sat_small.cnf"), "--stats", str(stats_path))
    assert code == 10
    assert out.splitlines()[0] == "s SATISFIABLE"
    assert out.splitlines()[-1].startswith("v ")
    assert out.rstrip().endswith(" 0")
    assert RunStats.model_validate_json(stats_path.read_text()).outcome == "SAT"


def test_solve_unsat_with_proof(tmp_path, run_main):
    proof = tmp_path / "p.drat"
    code, out = run_main("solve", str(php(tmp_path, 4)), "--proof", str(proof))
    assert code == 20
    assert out.strip() == "s UNSATISFIABLE"
    assert proof.read_text().endswith("0\n")


def test_solve_unknown(tmp_path, run_main):
    code, out = run_main("solve", str(php(tmp_path, 5)), "--conflicts", "1")
    assert code == 0
    assert out.strip() == "s UNKNOWN"


def test_solve_unreadable(tmp_path, run_main):
    code, _ = run_main("solve", str(write(tmp_path / "bad.cnf", "p cnf 1 1\n2 0\n")))
    assert code == 1


def test_model_lines():
    assert harness.model_lines([1, -2, 3], per_line=2) == ["v 1 -2", "v 3 0"]


def test_gen_bench_and_history(tmp_path, db_path, run_main):
    code, _ = run_main("gen", str(tmp_path / "suite"), "--count", "2", "--vars", "12", "--pigeons", "3")
    assert code == 0
    code, out = run_main("bench", str(tmp_path / "suite"), "--compare-crvr", "--csv", str(tmp_path / "rows.csv"))
    assert code == 0
    assert "PAR-2" in out
    run_id = out.strip().splitlines()[-1].split()[-1]
    code, out = run_main("history")
    assert code == 0
    assert run_id in out
    code, out = run_main("history", run_id)
    assert code == 0
    assert '"kind": "comparison"' in out
    code, _ = run_main("history", "no-such-run")
    assert code == 1
    code, out = run_main("history", "--instance", "php_3_2.cnf")
    assert code == 0
    assert len(out.strip().splitlines()) == 2
    assert "UNSAT" in out
    with open(tmp_path / "rows.csv") as f:
        assert len(list(csv.reader(f))) == 1 + 2 * 3


def test_bench_missing_directory(tmp_path, run_main):
    code, _ = run_main("bench", str(tmp_path / "missing"), "--no-db")
    assert code == 1
