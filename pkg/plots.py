# plots.py
"""SVG charts for benchmark reports.

The ``*_data`` helpers compute what is drawn and are used directly by tests;
the ``plot_*`` functions render them with matplotlib's Agg backend.
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({"svg.hashsalt": "bench", "axes.unicode_minus": False})
import matplotlib.pyplot as plt  # noqa: E402

from models import ReportRow  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SVG_METADATA = {"Date": None}


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug("Wrote %s", path)
    return path


def _with_stats(rows: Sequence[ReportRow]) -> List[ReportRow]:
    return [r for r in rows if r.stats is not None]


# ────────────────────────── DATA ─────────────────────────────────────────────
def lbd_profile_data(rows: Sequence[ReportRow]) -> List[Tuple[str, float, float, float]]:
    """(instance, aLBD_sc, aLBD_mc, avg min LBD_mc), sorted by aLBD_mc."""
    points = []
    for r in _with_stats(rows):
        s = r.stats
        if None in (s.albd_sc, s.albd_mc, s.avg_min_lbd_mc):
            continue
        points.append((r.instance, s.albd_sc, s.albd_mc, s.avg_min_lbd_mc))
    points.sort(key=lambda p: (p[2], p[0]))
    return points


def burst_histogram_data(rows: Sequence[ReportRow], max_burst: int = 10) -> Dict[int, float]:
    """Mean count_b over instances for b = 2..max_burst."""
    stats = [r.stats for r in _with_stats(rows)]
    if not stats:
        return {b: 0.0 for b in range(2, max_burst + 1)}
    return {b: sum(s.count_b.get(b, 0) for s in stats) / len(stats) for b in range(2, max_burst + 1)}


def proximity_data(rows: Sequence[ReportRow]) -> List[Tuple[str, float, float]]:
    """(instance, mean cp over mc sequences, mean cp over sc sequences)."""
    return sorted((r.instance, r.stats.cp_mc_mean, r.stats.cp_sc_mean)
                  for r in _with_stats(rows)
                  if r.stats.cp_mc_mean is not None and r.stats.cp_sc_mean is not None)


def burst_extent_data(rows: Sequence[ReportRow]) -> List[Tuple[str, float, int]]:
    return sorted((r.instance, r.stats.avg_burst, r.stats.max_burst)
                  for r in _with_stats(rows) if r.stats.avg_burst is not None)


def solved_delta_curve(baseline: Sequence[ReportRow],
                       crvr: Sequence[ReportRow]) -> Tuple[List[float], List[int]]:
    """Cumulative (CRVR solved - baseline solved) over a shared time grid.

    The grid is 0 followed by every solve time seen in either run; the value at
    t counts instances solved within t seconds.
    """
    base_times = sorted(r.wall_time for r in baseline if r.solved)
    crvr_times = sorted(r.wall_time for r in crvr if r.solved)
    grid = sorted(set(base_times) | set(crvr_times))
    times, deltas = [0.0], [0]
    i = j = 0
    for t in grid:
        while i < len(base_times) and base_times[i] <= t:
            i += 1
        while j < len(crvr_times) and crvr_times[j] <= t:
            j += 1
        times.append(t)
        deltas.append(j - i)
    return times, deltas


# ────────────────────────── CHARTS ───────────────────────────────────────────
def plot_lbd_profile(rows: Sequence[ReportRow], path: PathLike, title: str = "") -> Path:
    points = lbd_profile_data(rows)
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    xs = list(range(len(points)))
    ax.plot(xs, [p[1] for p in points], marker="o", markersize=3, label="aLBD sc")
    ax.plot(xs, [p[2] for p in points], marker="s", markersize=3, label="aLBD mc")
    ax.plot(xs, [p[3] for p in points], marker="^", markersize=3, label="avg min LBD mc")
    if points:
        ax.set_yscale("log")
    ax.set_xlabel("Instance (sorted by aLBD mc)")
    ax.set_ylabel("LBD")
    ax.set_title(title or "Learned clause quality: sc vs mc decisions")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_burst_histogram(rows: Sequence[ReportRow], path: PathLike, max_burst: int = 10,
                         title: str = "") -> Path:
    hist = burst_histogram_data(rows, max_burst)
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.bar([str(b) for b in hist], list(hist.values()))
    ax.set_xlabel("Conflicts in the decision (burst)")
    ax.set_ylabel("Mean decisions per instance")
    ax.set_title(title or "mc decisions by burst size")
    ax.grid(True, axis="y", alpha=0.3)
    return _save(fig, path)


def plot_proximity(rows: Sequence[ReportRow], path: PathLike, title: str = "") -> Path:
    points = proximity_data(rows)
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    xs = list(range(len(points)))
    ax.plot(xs, [p[1] for p in points], marker="o", markersize=3, label="cp mc")
    ax.plot(xs, [p[2] for p in points], marker="s", markersize=3, label="cp sc")
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("Instance")
    ax.set_ylabel("Mean ConflictsProximity")
    ax.set_title(title or "Reason level overlap: mc vs sc sequences")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_burst_extent(rows: Sequence[ReportRow], path: PathLike, title: str = "") -> Path:
    points = burst_extent_data(rows)
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    xs = list(range(len(points)))
    ax.plot(xs, [p[1] for p in points], marker="o", markersize=3, label="avg burst")
    ax.plot(xs, [p[2] for p in points], marker="s", markersize=3, label="max burst")
    if points:
        ax.set_yscale("log")
    ax.set_xlabel("Instance")
    ax.set_ylabel("Conflicts per mc decision")
    ax.set_title(title or "Burst size per instance")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_solved_delta(baseline: Sequence[ReportRow], crvr: Sequence[ReportRow],
                      path: PathLike, title: str = "") -> Path:
    times, deltas = solved_delta_curve(baseline, crvr)
    fig, ax = plt.subplots(figsize=(8, 4.5), constrained_layout=True)
    ax.step(times, deltas, where="post")
    ax.axhline(0, color="grey", linewidth=0.8)
    ax.set_xlabel("Time (s)")
    ax.set_ylabel("Solved with CRVR - solved baseline")
    ax.set_title(title or "Cumulative solved instances, CRVR minus baseline")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)
