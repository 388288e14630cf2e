# cnf.py
"""CNF formulas: literals, clauses, DIMACS reading/writing and model checking.

Literals have two spellings. The public one is the DIMACS integer (``3``,
``-3``) or the ``Literal`` tuple; the solver core uses *codes*
(``2*var`` for the positive literal, ``2*var + 1`` for the negative one) so
that negation is ``code ^ 1`` and per-literal arrays are plain lists.
"""

import bz2
import gzip
import logging
import lzma
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, TextIO, Tuple, Union

logger = logging.getLogger(__name__)


# ────────────────────────── ERRORS ───────────────────────────────────────────
class DimacsParseError(ValueError):
    """Malformed DIMACS input. ``line_no`` is 1-based (0 when unknown)."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ContractViolation(AssertionError):
    """A caller broke an operation's precondition."""


# ────────────────────────── LITERAL ENCODING ─────────────────────────────────
def lit_code(dimacs_lit: int) -> int:
    """DIMACS literal → solver code."""
    return (dimacs_lit << 1) if dimacs_lit > 0 else ((-dimacs_lit) << 1) | 1


def code_to_dimacs(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


class Literal(NamedTuple):
    variable: int
    polarity: bool = True

    @classmethod
    def from_dimacs(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(value), value > 0)

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.polarity)

    @property
    def dimacs(self) -> int:
        return self.variable if self.polarity else -self.variable

    @property
    def code(self) -> int:
        return (self.variable << 1) | (0 if self.polarity else 1)


@dataclass(frozen=True)
class Clause:
    """A normalized clause. Duplicates are dropped on construction; a clause
    holding both l and ¬l keeps its literals but is marked ``tautology``."""

    literals: Tuple[Literal, ...]
    tautology: bool = False

    @classmethod
    def of(cls, dimacs_lits: Iterable[int]) -> "Clause":
        seen = set()
        lits: List[Literal] = []
        for value in dimacs_lits:
            if value in seen:
                continue
            seen.add(value)
            lits.append(Literal.from_dimacs(value))
        tautology = any(-value in seen for value in seen)
        return cls(tuple(lits), tautology)

    @property
    def dimacs(self) -> List[int]:
        return [lit.dimacs for lit in self.literals]

    @property
    def codes(self) -> List[int]:
        return [lit.code for lit in self.literals]

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals


@dataclass
class Formula:
    num_vars: int
    clauses: List[Clause] = field(default_factory=list)

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause.literals:
                if lit.variable < 1 or lit.variable > self.num_vars:
                    raise ValueError(f"variable {lit.variable} exceeds declared {self.num_vars}")

    @classmethod
    def from_lists(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> "Formula":
        return cls(num_vars, [Clause.of(c) for c in clauses])

    @property
    def trivially_unsat(self) -> bool:
        return any(c.is_empty for c in self.clauses)


@dataclass(frozen=True)
class Model:
    """Total assignment. ``values[v - 1]`` is the value of variable v."""

    values: Tuple[bool, ...]

    def __getitem__(self, variable: int) -> bool:
        return self.values[variable - 1]

    @property
    def num_vars(self) -> int:
        return len(self.values)

    @property
    def assignment(self) -> Dict[int, bool]:
        return {v + 1: value for v, value in enumerate(self.values)}

    def satisfies(self, lit: Literal) -> bool:
        return self.values[lit.variable - 1] == lit.polarity

    def dimacs(self) -> List[int]:
        return [v + 1 if value else -(v + 1) for v, value in enumerate(self.values)]


# ────────────────────────── DIMACS ───────────────────────────────────────────
def parse_dimacs(text: Union[str, Iterable[str]]) -> Formula:
    """Parse DIMACS CNF from a string or an iterable of lines."""
    lines = text.splitlines() if isinstance(text, str) else text
    num_vars: Optional[int] = None
    declared_clauses = 0
    clauses: List[Clause] = []
    pending: List[int] = []
    pending_line = 0
    line_no = 0

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):  # SATLIB uf* files end with "%\n0\n"
            break
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise DimacsParseError(line_no, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(line_no, f"malformed header {line!r}")
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(line_no, f"malformed header {line!r}") from None
            if num_vars < 0 or declared_clauses < 0:
                raise DimacsParseError(line_no, f"malformed header {line!r}")
            continue
        if num_vars is None:
            raise DimacsParseError(line_no, "clause before 'p cnf' header")
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise DimacsParseError(line_no, f"invalid literal {token!r}") from None
            if value == 0:
                clauses.append(Clause.of(pending))
                pending = []
                continue
            if abs(value) > num_vars:
                raise DimacsParseError(line_no, f"variable {abs(value)} exceeds declared {num_vars}")
            if not pending:
                pending_line = line_no
            pending.append(value)

    if num_vars is None:
        raise DimacsParseError(line_no, "missing 'p cnf' header")
    if pending:
        raise DimacsParseError(pending_line, "clause is missing its terminating 0")
    if len(clauses) != declared_clauses:
        logger.warning("Header declares %d clauses, found %d", declared_clauses, len(clauses))
    return Formula(num_vars, clauses)


_OPENERS = {".gz": gzip.open, ".xz": lzma.open, ".lzma": lzma.open, ".bz2": bz2.open}


def load_formula(path: Union[str, Path]) -> Formula:
    """Read a DIMACS file, transparently decompressing .gz/.xz/.bz2."""
    path = Path(path)
    opener = _OPENERS.get(path.suffix.lower(), open)
    with opener(path, "rt") as fh:
        return parse_dimacs(fh)


def to_dimacs(f: Formula, comments: Sequence[str] = ()) -> str:
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    out.extend(" ".join(str(x) for x in c.dimacs + [0]) for c in f.clauses)
    return "\n".join(out) + "\n"


def write_dimacs(f: Formula, sink: TextIO, comments: Sequence[str] = ()) -> None:
    sink.write(to_dimacs(f, comments))


def check_model(f: Formula, m: Model) -> bool:
    if m.num_vars < f.num_vars:
        return False
    return all(any(m.satisfies(lit) for lit in c.literals) for c in f.clauses)


# ────────────────────────── GENERATORS ───────────────────────────────────────
def random_ksat(num_vars: int, num_clauses: int, k: int = 3,
                rng: Optional[random.Random] = None) -> Formula:
    """Uniform random k-SAT: k distinct variables per clause, random signs."""
    rng = rng or random.Random()
    if k > num_vars:
        raise ValueError(f"k={k} exceeds num_vars={num_vars}")
    clauses = []
    for _ in range(num_clauses):
        chosen = rng.sample(range(1, num_vars + 1), k)
        clauses.append(Clause.of(v if rng.random() < 0.5 else -v for v in chosen))
    return Formula(num_vars, clauses)


def pigeonhole(pigeons: int, holes: int) -> Formula:
    """PHP(p, h): every pigeon gets a hole, no hole holds two pigeons."""
    def var(p: int, h: int) -> int:
        return p * holes + h + 1

    clauses = [Clause.of(var(p, h) for h in range(holes)) for p in range(pigeons)]
    for h in range(holes):
        for p in range(pigeons):
            for q in range(p + 1, pigeons):
                clauses.append(Clause.of((-var(p, h), -var(q, h))))
    return Formula(pigeons * holes, clauses)
