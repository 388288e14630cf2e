# analytics.py
"""Conflict analytics: sc/mc decision classification, bursts, LBD aggregates
and ConflictsProximity between reason-clause sequences.

The engine reports three kinds of events, strictly in this order per decision:
``on_decision`` when it branches, ``on_conflict`` for every learned clause and
``on_decision_end`` just before the next branch (or when the run stops).
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Deque, Dict, FrozenSet, Iterable, List, Optional, Sequence

from cnf import ContractViolation
from models import RunStats

logger = logging.getLogger(__name__)

NONE, SC, MC = "none", "sc", "mc"


@dataclass(frozen=True)
class ChainCertificate:
    """Trail facts linking conflict i (asserting ¬f_i) to conflict i+1 (fUIP f_{i+1}).

    Both conflicts belong to the same decision, so no branching decision lies
    between them. ``holds`` (fUIP at or after the asserting literal on the
    trail) fails often after a non-chronological backjump; ``same_level``
    always holds.
    """
    assert_position: int
    assert_level: int
    fuip_position: int
    fuip_level: int

    @property
    def holds(self) -> bool:
        return self.fuip_position >= self.assert_position

    @property
    def same_level(self) -> bool:
        return self.fuip_level == self.assert_level


@dataclass
class ConflictEvent:
    conflict_index: int
    lbd: int
    reason_level_set: FrozenSet[int]
    fuip_variable: int
    level_decision_vars: Dict[int, int] = field(default_factory=dict)
    chain: Optional[ChainCertificate] = None


@dataclass
class DecisionRecord:
    decision_index: int
    conflicts: List[ConflictEvent] = field(default_factory=list)

    @property
    def burst(self) -> int:
        return len(self.conflicts)

    @property
    def kind(self) -> str:
        if not self.conflicts:
            return NONE
        return SC if len(self.conflicts) == 1 else MC

    @property
    def min_lbd(self) -> int:
        return min(e.lbd for e in self.conflicts)


class ScWindow:
    """The most recent reason level sets produced by sc decisions."""

    def __init__(self, capacity: int = 10):
        self.events: Deque[ConflictEvent] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.events)

    def push(self, event: ConflictEvent) -> None:
        self.events.append(event)

    def last(self, x: int) -> List[ConflictEvent]:
        return list(self.events)[-x:] if x else []


@dataclass(frozen=True)
class ProximitySample:
    kind: str
    burst: int
    lbp_size: int
    union_size: int
    cp: Fraction


# ────────────────────────── SET ALGEBRA ──────────────────────────────────────
def level_set(r: Iterable[int], trail) -> FrozenSet[int]:
    """𝒟(r): distinct decision levels of the (solver-coded) literals in r."""
    levels = set()
    for code in r:
        if not trail.value[code]:
            raise ContractViolation(f"literal {code} is unassigned")
        levels.add(trail.level[code >> 1])
    return frozenset(levels)


def lbp(seq: Sequence[FrozenSet[int]]) -> FrozenSet[int]:
    if not seq:
        raise ContractViolation("lbp of an empty sequence")
    return frozenset(reduce(lambda a, b: a & b, seq))


def conflicts_proximity(seq: Sequence[FrozenSet[int]]) -> Optional[Fraction]:
    """|∩ seq| / |∪ seq|, or None when the union is empty."""
    if not seq:
        raise ContractViolation("conflicts_proximity of an empty sequence")
    union = frozenset().union(*seq)
    if not union:
        return None
    return Fraction(len(lbp(seq)), len(union))


def _sample(kind: str, sets: List[FrozenSet[int]]) -> Optional[ProximitySample]:
    cp = conflicts_proximity(sets)
    if cp is None:
        return None
    union = frozenset().union(*sets)
    return ProximitySample(kind, len(sets), len(lbp(sets)), len(union), cp)


def sample_proximity(mc: DecisionRecord, window: ScWindow,
                     max_tracked_burst: int = 10) -> List[ProximitySample]:
    x = mc.burst
    if x < 2:
        raise ContractViolation(f"sample_proximity on a decision with burst {x}")
    if x > max_tracked_burst:
        return []
    samples = []
    mc_sample = _sample(MC, [e.reason_level_set for e in mc.conflicts])
    if mc_sample:
        samples.append(mc_sample)
    if len(window) >= x:
        sc_sample = _sample(SC, [e.reason_level_set for e in window.last(x)])
        if sc_sample:
            samples.append(sc_sample)
    return samples


# ────────────────────────── EVENT INGESTION ──────────────────────────────────
class Analytics:
    def __init__(self, max_tracked_burst: int = 10,
                 on_mc: Optional[Callable[[DecisionRecord], None]] = None,
                 keep_samples: bool = True):
        self.max_tracked_burst = max_tracked_burst
        self.on_mc = on_mc
        self.keep_samples = keep_samples
        self.window = ScWindow(max_tracked_burst)
        self.current: Optional[DecisionRecord] = None
        self.samples: List[ProximitySample] = []

        self.d = self.c = self.s = self.m = 0
        self.c_s = self.c_m = 0
        self.sum_lbd = self.sum_lbd_sc = self.sum_lbd_mc = 0
        self.sum_min_lbd_mc = 0
        self.glue = 0
        self.count_b: Dict[int, int] = {b: 0 for b in range(2, max_tracked_burst + 1)}
        self.max_burst = 0
        self.burst_overflow = 0
        self.burst_overflow_conflicts = 0
        self.cp_sum = {MC: Fraction(0), SC: Fraction(0)}
        self.cp_count = {MC: 0, SC: 0}
        self.claim1_checked = 0
        self.claim1_violations = 0
        self.claim1_level_violations = 0

    def on_decision(self) -> None:
        if self.current is not None:
            raise ContractViolation("on_decision while the previous decision is still open")
        self.d += 1
        self.current = DecisionRecord(self.d)

    def on_conflict(self, e: ConflictEvent) -> None:
        record = self.current
        if record is None:
            raise ContractViolation("on_conflict outside of a decision")
        if record.conflicts and e.conflict_index <= record.conflicts[-1].conflict_index:
            raise ContractViolation("conflict events out of order")
        if record.conflicts:
            if e.chain is None:
                raise ContractViolation("second conflict of a decision without a chain certificate")
            self.claim1_checked += 1
            if not e.chain.holds:
                self.claim1_violations += 1
            if not e.chain.same_level:
                self.claim1_level_violations += 1
        record.conflicts.append(e)
        self.c += 1
        self.sum_lbd += e.lbd
        if e.lbd == 2:
            self.glue += 1

    def on_decision_end(self) -> Optional[DecisionRecord]:
        record = self.current
        if record is None:
            raise ContractViolation("on_decision_end without an open decision")
        self.current = None
        x = record.burst
        if x == 1:
            self.s += 1
            self.c_s += 1
            self.sum_lbd_sc += record.conflicts[0].lbd
            self.window.push(record.conflicts[0])
        elif x >= 2:
            self.m += 1
            self.c_m += x
            self.sum_lbd_mc += sum(e.lbd for e in record.conflicts)
            self.sum_min_lbd_mc += record.min_lbd
            self.max_burst = max(self.max_burst, x)
            if x <= self.max_tracked_burst:
                self.count_b[x] += 1
            else:
                self.burst_overflow += 1
                self.burst_overflow_conflicts += x
            for sample in sample_proximity(record, self.window, self.max_tracked_burst):
                self.cp_sum[sample.kind] += sample.cp
                self.cp_count[sample.kind] += 1
                if self.keep_samples:
                    self.samples.append(sample)
            if self.on_mc is not None:
                self.on_mc(record)
        return record

    def close(self) -> None:
        if self.current is not None:
            self.on_decision_end()

    def finalize_stats(self, outcome: str, wall_time: float = 0.0, **counters) -> RunStats:
        self.close()

        def ratio(num, den) -> Optional[float]:
            return None if not den else num / den

        def cp_mean(kind: str) -> Optional[float]:
            n = self.cp_count[kind]
            return None if not n else float(self.cp_sum[kind] / n)

        return RunStats(
            outcome=outcome,
            wall_time=wall_time,
            d=self.d, c=self.c, s=self.s, m=self.m, c_s=self.c_s, c_m=self.c_m,
            no_conflict_decisions=self.d - self.s - self.m,
            sum_lbd=self.sum_lbd, sum_lbd_sc=self.sum_lbd_sc, sum_lbd_mc=self.sum_lbd_mc,
            sum_min_lbd_mc=self.sum_min_lbd_mc, glue_count=self.glue,
            count_b=dict(self.count_b), max_burst=self.max_burst,
            burst_overflow=self.burst_overflow,
            burst_overflow_conflicts=self.burst_overflow_conflicts,
            cp_mc_samples=self.cp_count[MC], cp_sc_samples=self.cp_count[SC],
            cp_mc_mean=cp_mean(MC), cp_sc_mean=cp_mean(SC),
            pdsc=ratio(self.s, self.d), pdmc=ratio(self.m, self.d),
            glr=ratio(self.c, self.d), g2l=ratio(self.glue, self.c),
            albd=ratio(self.sum_lbd, self.c),
            albd_sc=ratio(self.sum_lbd_sc, self.c_s),
            albd_mc=ratio(self.sum_lbd_mc, self.c_m),
            avg_min_lbd_mc=ratio(self.sum_min_lbd_mc, self.m),
            avg_burst=ratio(self.c_m, self.m),
            claim1_checked=self.claim1_checked,
            claim1_violations=self.claim1_violations,
            claim1_level_violations=self.claim1_level_violations,
            **counters,
        )


def accounting_errors(stats: RunStats) -> List[str]:
    """Identities every finished run must satisfy; returns the broken ones."""
    errors = []
    if stats.c != stats.c_s + stats.c_m:
        errors.append(f"c={stats.c} != c_s+c_m={stats.c_s + stats.c_m}")
    if stats.c_s != stats.s:
        errors.append(f"c_s={stats.c_s} != s={stats.s}")
    tracked = sum(b * n for b, n in stats.count_b.items())
    if tracked + stats.burst_overflow_conflicts != stats.c_m:
        errors.append(f"sum of bursts {tracked + stats.burst_overflow_conflicts} != c_m={stats.c_m}")
    if stats.m > 0 and stats.max_burst < 2:
        errors.append("max_burst < 2 with mc decisions present")
    if stats.s + stats.m > stats.d:
        errors.append("PDSC + PDMC > 1")
    for mean in (stats.cp_mc_mean, stats.cp_sc_mean):
        if mean is not None and not 0.0 <= mean <= 1.0:
            errors.append(f"cp mean {mean} outside [0, 1]")
    return errors
