# engine.py
"""CDCL core: trail, two-watched-literal propagation, first-UIP learning with
recursive minimization, backjumping, Luby restarts and LBD-based clause
database reduction.

Every branching decision and every learned clause is reported to an
``analytics.Analytics`` instance; with CRVR enabled the end of each
multi-conflict decision also runs ``branching.detect_poor_crv``.
"""

import logging
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, TextIO, Tuple

from analytics import Analytics, ChainCertificate, ConflictEvent, DecisionRecord, level_set
from branching import (ActivityState, CrvrParams, PoorCrvFlags, bump_and_decay,
                       crvr_branch, detect_poor_crv)
from cnf import ContractViolation, Formula, Model, check_model, code_to_dimacs
from models import RunStats, SolverConfig
from proof import DratWriter

logger = logging.getLogger(__name__)

# Reason marker for level-0 facts that have no clause behind them.
UNIT = "unit"


class Outcome(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


# ────────────────────────── CLAUSES AND TRAIL ────────────────────────────────
class ClauseRecord:
    """A clause in the solver database. ``lits[0]``/``lits[1]`` are watched;
    for a reason clause ``lits[0]`` is the literal it implied."""

    __slots__ = ("lits", "learnt", "lbd", "birth_conflict_index", "activity", "removed")

    def __init__(self, lits: List[int], learnt: bool = False, lbd: int = 0,
                 birth_conflict_index: int = 0):
        self.lits = lits
        self.learnt = learnt
        self.lbd = lbd
        self.birth_conflict_index = birth_conflict_index
        self.activity = 0.0
        self.removed = False

    def dimacs(self) -> List[int]:
        return [code_to_dimacs(c) for c in self.lits]

    def __repr__(self) -> str:
        kind = f"learnt lbd={self.lbd}" if self.learnt else "original"
        return f"ClauseRecord({self.dimacs()}, {kind})"


@dataclass(frozen=True)
class AssignmentRecord:
    literal: int
    decision_level: int
    reason: object  # None = decision, UNIT = level-0 fact, else ClauseRecord
    trail_position: int

    @property
    def is_decision(self) -> bool:
        return self.reason is None


class Trail:
    """Assignment stack. ``value[code]`` is 1/-1/0 (true/false/unassigned);
    ``lim[dl - 1]`` is the trail index of level dl's decision."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.value = [0] * (2 * num_vars + 2)
        self.level = [0] * (num_vars + 1)
        self.reason: List[object] = [None] * (num_vars + 1)
        self.position = [-1] * (num_vars + 1)
        self.lits: List[int] = []
        self.lim: List[int] = []

    @property
    def current_level(self) -> int:
        return len(self.lim)

    def __len__(self) -> int:
        return len(self.lits)

    def is_free(self, v: int) -> bool:
        return self.value[v << 1] == 0

    def assign(self, code: int, reason: object) -> None:
        v = code >> 1
        self.value[code] = 1
        self.value[code ^ 1] = -1
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.position[v] = len(self.lits)
        self.lits.append(code)

    def new_level(self, decision: int) -> None:
        self.lim.append(len(self.lits))
        self.assign(decision, None)

    def record(self, i: int) -> AssignmentRecord:
        code = self.lits[i]
        v = code >> 1
        return AssignmentRecord(code, self.level[v], self.reason[v], i)

    def records(self) -> List[AssignmentRecord]:
        return [self.record(i) for i in range(len(self.lits))]

    def decision_var(self, dl: int) -> int:
        return self.lits[self.lim[dl - 1]] >> 1

    def verify(self) -> None:
        """Level monotonicity, one decision per level, no duplicate variable."""
        seen = set()
        prev_level = 0
        for i, code in enumerate(self.lits):
            v = code >> 1
            if v in seen:
                raise ContractViolation(f"variable {v} appears twice on the trail")
            seen.add(v)
            lvl = self.level[v]
            if lvl < prev_level:
                raise ContractViolation(f"trail level decreases at position {i}")
            prev_level = lvl
            if self.position[v] != i or self.value[code] != 1:
                raise ContractViolation(f"stale bookkeeping for variable {v}")
            is_start = lvl > 0 and self.lim[lvl - 1] == i
            if (self.reason[v] is None) != is_start:
                raise ContractViolation(f"decision/reason mismatch at position {i}")


# ────────────────────────── CORE OPERATIONS ──────────────────────────────────
def compute_lbd(c: Iterable[int], trail: Trail) -> int:
    """Number of distinct decision levels among the (assigned) literals of c."""
    return len(level_set(c, trail))


def luby(y: float, x: int) -> float:
    """x-th element (0-based) of the Luby sequence with base y."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


def restart_check(conflicts_since_restart: int, restarts: int, unit: int = 128) -> bool:
    return conflicts_since_restart >= unit * luby(2, restarts)


def reduce_clause_db(learnts: Sequence[ClauseRecord],
                     is_locked: Callable[[ClauseRecord], bool]) -> Tuple[List[ClauseRecord], List[ClauseRecord]]:
    """Keep glue (lbd <= 2) and locked clauses, drop the worst half of the rest.

    Returns (kept, removed). Ordering is by (lbd, -activity), worst last.
    """
    kept, candidates = [], []
    for c in learnts:
        if c.lbd <= 2 or is_locked(c):
            kept.append(c)
        else:
            candidates.append(c)
    candidates.sort(key=lambda c: (c.lbd, -c.activity))
    half = len(candidates) // 2
    survivors, removed = candidates[:len(candidates) - half], candidates[len(candidates) - half:]
    return kept + survivors, removed


def emit_drat(event: str, clause: Iterable[int], sink: DratWriter) -> None:
    """Log a learned ("learn") or deleted ("delete") clause given as solver codes."""
    lits = [code_to_dimacs(c) for c in clause]
    if event == "learn":
        sink.learn(lits)
    elif event == "delete":
        sink.delete(lits)
    else:
        raise ValueError(f"unknown proof event {event!r}")


@dataclass
class ConflictAnalysisResult:
    learned: List[int]      # asserting literal ¬f first, then the backjump-level literal
    lbd: int
    fuip: int               # f, the true literal at the conflict level
    backjump_level: int
    reason_level_set: frozenset
    seen_vars: List[int]

    @property
    def reason_clause(self) -> List[int]:
        return self.learned[1:]

    @property
    def is_glue(self) -> bool:
        return self.lbd == 2


def _lit_redundant(p: int, abstract_levels: int, trail: Trail, seen: List[bool],
                   to_clear: List[int]) -> bool:
    level, reason = trail.level, trail.reason
    stack = [p]
    top = len(to_clear)
    while stack:
        q = stack.pop()
        c = reason[q >> 1]
        for r in c.lits:
            v = r >> 1
            if v == q >> 1 or seen[v] or level[v] == 0:
                continue
            if reason[v] is not None and reason[v] is not UNIT and (1 << (level[v] & 31)) & abstract_levels:
                seen[v] = True
                stack.append(r)
                to_clear.append(v)
            else:
                for u in to_clear[top:]:
                    seen[u] = False
                del to_clear[top:]
                return False
    return True


def analyze_conflict(conflict: ClauseRecord, trail: Trail, seen: Optional[List[bool]] = None,
                     minimize: bool = True) -> ConflictAnalysisResult:
    """First-UIP learning, resolving current-level literals in reverse trail order."""
    current = trail.current_level
    if current == 0:
        raise ContractViolation("conflict at level 0 is global unsatisfiability, not analyzable")
    if seen is None:
        seen = [False] * (trail.num_vars + 1)
    level, reason, lits = trail.level, trail.reason, trail.lits

    learned = [-1]
    seen_vars: List[int] = []
    path = 0
    p = -1
    idx = len(lits) - 1
    clause = conflict
    while True:
        for q in clause.lits:
            v = q >> 1
            if v == p >> 1 or seen[v] or level[v] == 0:
                continue
            seen[v] = True
            seen_vars.append(v)
            if level[v] >= current:
                path += 1
            else:
                learned.append(q)
        while not seen[lits[idx] >> 1]:
            idx -= 1
        p = lits[idx]
        idx -= 1
        pv = p >> 1
        seen[pv] = False
        path -= 1
        if path == 0:
            break
        clause = reason[pv]
    learned[0] = p ^ 1

    if minimize and len(learned) > 1:
        abstract = 0
        for q in learned[1:]:
            abstract |= 1 << (level[q >> 1] & 31)
        to_clear: List[int] = []
        kept = [learned[0]]
        for q in learned[1:]:
            r = reason[q >> 1]
            if r is None or r is UNIT or not _lit_redundant(q, abstract, trail, seen, to_clear):
                kept.append(q)
        for v in to_clear:
            seen[v] = False
        learned = kept
    for v in seen_vars:
        seen[v] = False

    if len(learned) == 1:
        bl = 0
    else:
        best = 1
        for i in range(2, len(learned)):
            if level[learned[i] >> 1] > level[learned[best] >> 1]:
                best = i
        learned[1], learned[best] = learned[best], learned[1]
        bl = level[learned[1] >> 1]

    reasons = frozenset(level[q >> 1] for q in learned[1:])
    lbd = len(reasons | {current})
    return ConflictAnalysisResult(learned, lbd, p, bl, reasons, seen_vars)


def propagate(trail: Trail, watches: List[List[ClauseRecord]], qhead: int) -> Tuple[Optional[ClauseRecord], int]:
    """Unit-propagate from trail index ``qhead``. Returns (conflict or None, new qhead)."""
    value, lits = trail.value, trail.lits
    assign = trail.assign
    while qhead < len(lits):
        false_lit = lits[qhead] ^ 1
        qhead += 1
        ws = watches[false_lit]
        i = j = 0
        n = len(ws)
        while i < n:
            c = ws[i]
            i += 1
            cl = c.lits
            if cl[0] == false_lit:
                cl[0], cl[1] = cl[1], false_lit
            first = cl[0]
            if value[first] == 1:
                ws[j] = c
                j += 1
                continue
            for k in range(2, len(cl)):
                if value[cl[k]] != -1:
                    cl[1], cl[k] = cl[k], false_lit
                    watches[cl[1]].append(c)
                    break
            else:
                ws[j] = c
                j += 1
                if value[first] == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return c, len(lits)
                assign(first, c)
        del ws[j:]
    return None, qhead


# ────────────────────────── SOLVER ───────────────────────────────────────────
class Solver:
    def __init__(self, formula: Formula, cfg: Optional[SolverConfig] = None,
                 proof: Optional[DratWriter] = None):
        self.formula = formula
        self.cfg = cfg or SolverConfig()
        self.proof = proof
        n = formula.num_vars
        self.num_vars = n
        self.trail = Trail(n)
        self.watches: List[List[ClauseRecord]] = [[] for _ in range(2 * n + 2)]
        self.clauses: List[ClauseRecord] = []
        self.learnts: List[ClauseRecord] = []
        self.qhead = 0
        self.seen = [False] * (n + 1)
        self.phase = [False] * (n + 1)
        self.rng = random.Random(self.cfg.seed)

        self.branching = ActivityState(n, decay=self.cfg.var_decay)
        self.flags = PoorCrvFlags.for_vars(n)
        self.crvr = CrvrParams(k=self.cfg.crvr_k, q=self.cfg.crvr_q, enabled=self.cfg.crvr_enabled)
        self.analytics = Analytics(self.cfg.max_tracked_burst,
                                   on_mc=self._on_mc if self.cfg.crvr_enabled else None)

        self.conflicts = 0
        self.conflicts_since_restart = 0
        self.restarts = 0
        self.reductions = 0
        self.learned_literals = 0
        self.next_reduce = self.cfg.reduce_base
        self.clause_increment = 1.0
        self.decision_trace: List[int] = []
        self.ok = True
        self._last_assert: Optional[Tuple[int, int]] = None
        self._decision_open = False
        self._load()

    # --- setup ---
    def _load(self) -> None:
        units = []
        for clause in self.formula.clauses:
            if clause.tautology:
                continue
            if clause.is_empty:
                self.ok = False
                return
            codes = clause.codes
            if len(codes) == 1:
                units.append(codes[0])
                continue
            c = ClauseRecord(codes)
            self.clauses.append(c)
            self.watches[codes[0]].append(c)
            self.watches[codes[1]].append(c)
        for code in units:
            val = self.trail.value[code]
            if val == -1:
                self.ok = False
                return
            if val == 0:
                self.trail.assign(code, UNIT)

    # --- helpers ---
    def _is_locked(self, c: ClauseRecord) -> bool:
        v = c.lits[0] >> 1
        return self.trail.reason[v] is c and self.trail.value[c.lits[0]] == 1

    def _is_free(self, v: int) -> bool:
        return self.trail.value[v << 1] == 0

    def _bump_clause(self, c: ClauseRecord) -> None:
        c.activity += self.clause_increment
        if c.activity > 1e20:
            for learnt in self.learnts:
                learnt.activity *= 1e-20
            self.clause_increment *= 1e-20

    def _on_mc(self, record: DecisionRecord) -> None:
        detect_poor_crv(record, self.crvr, self.trail, self.flags)

    def propagate(self) -> Optional[ClauseRecord]:
        conflict, self.qhead = propagate(self.trail, self.watches, self.qhead)
        if self.cfg.check_invariants and conflict is None:
            self.verify_watches()
        return conflict

    def backjump(self, bl: int) -> None:
        trail = self.trail
        if bl >= trail.current_level:
            return
        start = trail.lim[bl]
        value, reason, phase = trail.value, trail.reason, self.phase
        reinsert = self.branching.reinsert
        for i in range(len(trail.lits) - 1, start - 1, -1):
            code = trail.lits[i]
            v = code >> 1
            value[code] = 0
            value[code ^ 1] = 0
            reason[v] = None
            trail.position[v] = -1
            phase[v] = not (code & 1)
            reinsert(v)
        del trail.lits[start:]
        del trail.lim[bl:]
        self.qhead = min(self.qhead, start)

    def _pick_branch_var(self) -> Optional[int]:
        order = self.branching.order
        while order.data and not self._is_free(order.data[0]):
            order.pop()
        if not order.data:
            return None
        if self.cfg.random_var_freq and self.rng.random() < self.cfg.random_var_freq:
            v = order.data[self.rng.randrange(len(order.data))]
            # flagged picks fall through so crvr_branch reduces them first
            if self._is_free(v) and not (self.crvr.enabled and self.flags.poor_crv[v]):
                return v
        return crvr_branch(self.branching, self.flags, self.crvr, self._is_free)

    def _learn(self, result: ConflictAnalysisResult) -> None:
        learned = result.learned
        self.learned_literals += len(learned)
        if self.proof is not None:
            emit_drat("learn", learned, self.proof)
        if len(learned) == 1:
            self.backjump(0)
            self.trail.assign(learned[0], UNIT)
        else:
            c = ClauseRecord(learned, learnt=True, lbd=result.lbd,
                             birth_conflict_index=self.conflicts)
            self._bump_clause(c)
            self.learnts.append(c)
            self.watches[learned[0]].append(c)
            self.watches[learned[1]].append(c)
            self.backjump(result.backjump_level)
            self.trail.assign(learned[0], c)
        v = learned[0] >> 1
        self._last_assert = (self.trail.position[v], self.trail.level[v])

    def _conflict_event(self, result: ConflictAnalysisResult) -> ConflictEvent:
        trail = self.trail
        fv = result.fuip >> 1
        chain = None
        if self._last_assert is not None:
            chain = ChainCertificate(self._last_assert[0], self._last_assert[1],
                                     trail.position[fv], trail.level[fv])
        snapshot = {dl: trail.decision_var(dl) for dl in result.reason_level_set if dl > 0}
        return ConflictEvent(self.conflicts, result.lbd, result.reason_level_set, fv, snapshot, chain)

    def reduce_db(self) -> None:
        kept, removed = reduce_clause_db(self.learnts, self._is_locked)
        for c in removed:
            c.removed = True
            if self.proof is not None:
                emit_drat("delete", c.lits, self.proof)
        self.learnts = kept
        if removed:
            for code, ws in enumerate(self.watches):
                if ws:
                    self.watches[code] = [c for c in ws if not c.removed]
        self.reductions += 1
        self.next_reduce = self.conflicts + self.cfg.reduce_base + self.cfg.reduce_increment * self.reductions
        logger.debug("Reduced clause DB: kept %d, removed %d", len(kept), len(removed))
        if self.cfg.check_invariants:
            for v in range(1, self.num_vars + 1):
                r = self.trail.reason[v]
                if isinstance(r, ClauseRecord) and r.removed:
                    raise ContractViolation(f"reduction removed the reason of variable {v}")

    def verify_watches(self) -> None:
        value = self.trail.value
        for c in self.clauses + self.learnts:
            if c.removed:
                continue
            w0, w1 = c.lits[0], c.lits[1]
            if c not in self.watches[w0] or c not in self.watches[w1]:
                raise ContractViolation(f"{c!r} is not watched on its first two literals")
            if any(value[x] == 1 for x in c.lits):
                continue
            if value[w0] == -1 or value[w1] == -1:
                raise ContractViolation(f"{c!r} watches a false literal at fixpoint")

    # --- main loop ---
    def solve(self) -> Tuple[Outcome, Optional[Model], RunStats]:
        start = time.perf_counter()
        deadline = start + self.cfg.time_budget if self.cfg.time_budget else None
        outcome = self._search(deadline)
        model = None
        if outcome is Outcome.SAT:
            model = Model(tuple(self.trail.value[v << 1] == 1 for v in range(1, self.num_vars + 1)))
            if not check_model(self.formula, model):
                raise RuntimeError("internal error: model does not satisfy the formula")
        elif outcome is Outcome.UNSAT and self.proof is not None:
            self.proof.learn(())
        if self.proof is not None:
            self.proof.flush()
        stats = self.analytics.finalize_stats(
            outcome.value, time.perf_counter() - start,
            restarts=self.restarts, reductions=self.reductions,
            learned_literals=self.learned_literals,
            crvr_flagged=self.crvr.flagged_total, crvr_reductions=self.crvr.reductions,
            poor_mc_decisions=self.crvr.poor_decisions)
        logger.debug("Solved: %s after %d conflicts, %d decisions", outcome.value, stats.c, stats.d)
        return outcome, model, stats

    def _search(self, deadline: Optional[float]) -> Outcome:
        if not self.ok or self.propagate() is not None:
            return Outcome.UNSAT
        cfg = self.cfg
        analytics = self.analytics
        while True:
            conflict = self.propagate()
            if conflict is not None:
                if self.trail.current_level == 0:
                    return Outcome.UNSAT
                self.conflicts += 1
                self.conflicts_since_restart += 1
                result = analyze_conflict(conflict, self.trail, self.seen, cfg.minimize)
                if conflict.learnt:
                    self._bump_clause(conflict)
                bump_and_decay(self.branching, result.seen_vars)
                self.clause_increment /= cfg.clause_decay
                analytics.on_conflict(self._conflict_event(result))
                self.crvr.record_lbd(result.lbd)
                self._learn(result)
                if cfg.check_invariants:
                    self.trail.verify()
                if cfg.conflict_budget is not None and self.conflicts >= cfg.conflict_budget:
                    return Outcome.UNKNOWN
                if deadline is not None and self.conflicts % cfg.deadline_check_interval == 0 \
                        and time.perf_counter() >= deadline:
                    return Outcome.UNKNOWN
                continue

            if self._decision_open:
                analytics.on_decision_end()
                self._decision_open = False
                self._last_assert = None
            if restart_check(self.conflicts_since_restart, self.restarts, cfg.restart_unit):
                self.restarts += 1
                self.conflicts_since_restart = 0
                self.backjump(0)
                logger.debug("Restart #%d at conflict %d", self.restarts, self.conflicts)
            if self.conflicts >= self.next_reduce:
                self.reduce_db()
            v = self._pick_branch_var()
            if v is None:
                return Outcome.SAT
            code = (v << 1) | (0 if self.phase[v] else 1)
            self.decision_trace.append(code_to_dimacs(code))
            analytics.on_decision()
            self._decision_open = True
            self.trail.new_level(code)
            if cfg.check_invariants:
                self.trail.verify()


@dataclass
class SolveResult:
    outcome: Outcome
    model: Optional[Model]
    stats: RunStats
    decision_trace: List[int]


def solve(f: Formula, cfg: Optional[SolverConfig] = None,
          proof: Optional[TextIO] = None) -> SolveResult:
    writer = DratWriter(proof) if proof is not None else None
    solver = Solver(f, cfg, writer)
    outcome, model, stats = solver.solve()
    return SolveResult(outcome, model, stats, solver.decision_trace)

