# branching.py
"""Activity-based variable selection with Common Reason Variable Reduction.

The heap is a binary max-heap over variables ordered by activity (ties go to
the lower variable index so runs are reproducible). CRVR adds two things on
top of plain highest-activity selection:

- ``detect_poor_crv`` runs at the end of a multi-conflict decision. When even
  the best clause learned in that decision is worse than the recent average
  LBD, the decision variables of the levels shared by all its reason clauses
  are flagged.
- ``crvr_branch`` lazily cuts a flagged variable's activity by (1 - Q) the
  first time it reaches the top of the heap, clears the flag and retries.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

from analytics import lbp
from cnf import ContractViolation

logger = logging.getLogger(__name__)

RESCALE_LIMIT = 1e100
RESCALE_FACTOR = 1e-100


class VarHeap:
    """Indexed binary max-heap of variables keyed by ``activity``."""

    def __init__(self, activity: List[float]):
        self.activity = activity
        self.data: List[int] = []
        self.index: List[int] = [-1] * len(activity)

    def __len__(self) -> int:
        return len(self.data)

    def __contains__(self, v: int) -> bool:
        return self.index[v] >= 0

    def _before(self, x: int, y: int) -> bool:
        ax, ay = self.activity[x], self.activity[y]
        return ax > ay or (ax == ay and x < y)

    def _up(self, i: int) -> None:
        data, index = self.data, self.index
        x = data[i]
        while i > 0:
            parent = (i - 1) >> 1
            if not self._before(x, data[parent]):
                break
            data[i] = data[parent]
            index[data[i]] = i
            i = parent
        data[i] = x
        index[x] = i

    def _down(self, i: int) -> None:
        data, index = self.data, self.index
        x = data[i]
        n = len(data)
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and self._before(data[child + 1], data[child]):
                child += 1
            if not self._before(data[child], x):
                break
            data[i] = data[child]
            index[data[i]] = i
            i = child
        data[i] = x
        index[x] = i

    def insert(self, v: int) -> None:
        if self.index[v] >= 0:
            return
        self.data.append(v)
        self.index[v] = len(self.data) - 1
        self._up(len(self.data) - 1)

    def increased(self, v: int) -> None:
        if self.index[v] >= 0:
            self._up(self.index[v])

    def decreased(self, v: int) -> None:
        if self.index[v] >= 0:
            self._down(self.index[v])

    def top(self) -> int:
        return self.data[0]

    def pop(self) -> int:
        data, index = self.data, self.index
        top = data[0]
        last = data.pop()
        index[top] = -1
        if data:
            data[0] = last
            index[last] = 0
            self._down(0)
        return top


@dataclass
class ActivityState:
    num_vars: int
    decay: float = 0.95
    increment: float = 1.0
    activity: List[float] = field(init=False)
    order: VarHeap = field(init=False)

    def __post_init__(self):
        self.activity = [0.0] * (self.num_vars + 1)
        self.order = VarHeap(self.activity)
        for v in range(1, self.num_vars + 1):
            self.order.insert(v)

    def reinsert(self, v: int) -> None:
        self.order.insert(v)


@dataclass
class PoorCrvFlags:
    poor_crv: List[bool]

    @classmethod
    def for_vars(cls, num_vars: int) -> "PoorCrvFlags":
        return cls([False] * (num_vars + 1))

    def flagged(self) -> List[int]:
        return [v for v, f in enumerate(self.poor_crv) if f]


@dataclass
class CrvrParams:
    """CRVR knobs plus the sliding window θ is computed from."""
    k: int = 50
    q: float = 0.1
    enabled: bool = True
    theta: Optional[float] = None
    window: deque = field(init=False)
    _window_sum: int = field(default=0, init=False)
    flagged_total: int = field(default=0, init=False)
    reductions: int = field(default=0, init=False)
    poor_decisions: int = field(default=0, init=False)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"Q must lie in (0, 1), got {self.q}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        self.window = deque(maxlen=self.k)

    def record_lbd(self, lbd: int) -> None:
        if len(self.window) == self.k:
            self._window_sum -= self.window[0]
        self.window.append(lbd)
        self._window_sum += lbd

    def window_mean(self) -> Optional[float]:
        if not self.window:
            return None
        return self._window_sum / len(self.window)


# ────────────────────────── ACTIVITY ─────────────────────────────────────────
def bump_and_decay(state: ActivityState, vars_in_conflict: Iterable[int]) -> None:
    activity, order = state.activity, state.order
    inc = state.increment
    rescale = False
    for v in vars_in_conflict:
        activity[v] += inc
        if activity[v] > RESCALE_LIMIT:
            rescale = True
        order.increased(v)
    if rescale:
        for v in range(1, state.num_vars + 1):
            activity[v] *= RESCALE_FACTOR
        inc *= RESCALE_FACTOR
        logger.debug("Rescaled variable activities")
    state.increment = inc / state.decay


def dvar(trail, dl: int) -> int:
    """Decision variable of level ``dl`` on ``trail``."""
    if dl < 1 or dl > trail.current_level:
        raise ContractViolation(f"dvar({dl}) with current level {trail.current_level}")
    return trail.lits[trail.lim[dl - 1]] >> 1


# ────────────────────────── CRVR ─────────────────────────────────────────────
def detect_poor_crv(mc, params: CrvrParams, trail, flags: PoorCrvFlags) -> int:
    """Flag the common-reason decision variables of a poor mc decision.

    ``mc`` is a finished ``analytics.DecisionRecord``. Returns the number of
    variables whose flag went from false to true.
    """
    theta = params.window_mean()
    params.theta = theta
    if theta is None or mc.burst < 2:
        return 0
    if mc.min_lbd <= theta:
        return 0
    params.poor_decisions += 1
    common = lbp([e.reason_level_set for e in mc.conflicts])
    snapshot = mc.conflicts[-1].level_decision_vars
    newly = 0
    for dl in sorted(common):
        if dl == 0:
            continue
        if dl <= trail.current_level:
            v = dvar(trail, dl)
        else:
            v = snapshot[dl]
        if not flags.poor_crv[v]:
            flags.poor_crv[v] = True
            newly += 1
    params.flagged_total += newly
    if newly:
        logger.debug("Poor mc decision (min LBD %d > θ %.2f): flagged %d CRVs",
                     mc.min_lbd, theta, newly)
    return newly


def crvr_branch(state: ActivityState, flags: PoorCrvFlags, params: CrvrParams,
                is_free: Callable[[int], bool]) -> int:
    """Pick the next decision variable and remove it from the heap."""
    order, activity, poor = state.order, state.activity, flags.poor_crv
    while True:
        while order.data and not is_free(order.data[0]):
            order.pop()
        if not order.data:
            raise ContractViolation("crvr_branch called with no free variable")
        y = order.data[0]
        if params.enabled and poor[y]:
            activity[y] *= (1.0 - params.q)
            poor[y] = False
            params.reductions += 1
            order.decreased(y)
            continue
        return order.pop()


def select_max(state: ActivityState, is_free: Callable[[int], bool]) -> int:
    """Plain highest-activity selection, no CRVR bookkeeping at all."""
    order = state.order
    while order.data and not is_free(order.data[0]):
        order.pop()
    if not order.data:
        raise ContractViolation("select_max called with no free variable")
    return order.pop()
