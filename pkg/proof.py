# proof.py
"""DRAT proof output and checking.

- ``DratWriter`` streams learned clauses and deletions in DRAT text format.
- ``check_rup_proof`` is a small forward checker: every added lemma must be
  a RUP consequence of the clauses alive at that point, and the proof must
  end in a conflict. It needs no external tools, so tests always run it.
- ``run_drat_trim`` hands the files to the external drat-trim checker.
"""

import logging
import os
import shutil
import subprocess
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, TextIO, Tuple, Union

from cnf import Formula

logger = logging.getLogger(__name__)

DRAT_TRIM = os.getenv("DRAT_TRIM", "drat-trim")


class ProofWriteError(OSError):
    """The proof sink rejected a write; the run cannot continue."""


class DratWriter:
    def __init__(self, sink: TextIO):
        self.sink = sink
        self.lemmas = 0
        self.deletions = 0

    def _write(self, line: str) -> None:
        try:
            self.sink.write(line)
        except (OSError, ValueError) as e:
            raise ProofWriteError(f"cannot write DRAT proof: {e}") from e

    def learn(self, dimacs_lits: Iterable[int]) -> None:
        self._write(" ".join(str(x) for x in (*dimacs_lits, 0)) + "\n")
        self.lemmas += 1

    def delete(self, dimacs_lits: Iterable[int]) -> None:
        self._write("d " + " ".join(str(x) for x in (*dimacs_lits, 0)) + "\n")
        self.deletions += 1

    def flush(self) -> None:
        try:
            self.sink.flush()
        except (OSError, ValueError) as e:
            raise ProofWriteError(f"cannot flush DRAT proof: {e}") from e


def parse_drat(text: str) -> List[Tuple[bool, Tuple[int, ...]]]:
    """DRAT text → [(is_deletion, literals)]."""
    steps = []
    for line in text.splitlines():
        tokens = line.split()
        if not tokens or tokens[0] == "c":
            continue
        deletion = tokens[0] == "d"
        if deletion:
            tokens = tokens[1:]
        lits = tuple(int(t) for t in tokens)
        if not lits or lits[-1] != 0:
            raise ValueError(f"DRAT line not terminated by 0: {line!r}")
        steps.append((deletion, lits[:-1]))
    return steps


class _RupDatabase:
    """Clause multiset with occurrence lists, enough for forward RUP checks."""

    def __init__(self):
        self.clauses: List[Optional[Tuple[int, ...]]] = []
        self.by_key: Dict[Tuple[int, ...], List[int]] = defaultdict(list)
        self.occurs: Dict[int, List[int]] = defaultdict(list)

    def add(self, lits: Tuple[int, ...]) -> None:
        idx = len(self.clauses)
        lits = tuple(dict.fromkeys(lits))
        self.clauses.append(lits)
        self.by_key[tuple(sorted(lits))].append(idx)
        for lit in lits:
            self.occurs[lit].append(idx)

    def delete(self, lits: Tuple[int, ...]) -> bool:
        bucket = self.by_key.get(tuple(sorted(set(lits))))
        if not bucket:
            return False
        self.clauses[bucket.pop()] = None
        return True

    def rup(self, lemma: Tuple[int, ...]) -> bool:
        """True if asserting ¬lemma and unit-propagating yields a conflict."""
        value: Dict[int, bool] = {}
        queue: List[int] = []

        def assign(lit: int) -> bool:
            var, truth = abs(lit), lit > 0
            if var in value:
                return value[var] == truth
            value[var] = truth
            queue.append(lit)
            return True

        for lit in lemma:
            if not assign(-lit):
                return True
        for clause in self.clauses:
            if clause is None:
                continue
            unresolved = [l for l in clause if value.get(abs(l)) is None or value[abs(l)] == (l > 0)]
            if not unresolved:
                return True
            if len(unresolved) == 1 and value.get(abs(unresolved[0])) is None:
                assign(unresolved[0])

        head = 0
        while head < len(queue):
            falsified = -queue[head]
            head += 1
            for idx in self.occurs.get(falsified, ()):
                clause = self.clauses[idx]
                if clause is None:
                    continue
                free = None
                satisfied = False
                free_count = 0
                for l in clause:
                    val = value.get(abs(l))
                    if val is None:
                        free_count += 1
                        free = l
                    elif val == (l > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if free_count == 0:
                    return True
                if free_count == 1:
                    assign(free)
        return False


def check_rup_proof(formula: Formula, proof_text: str) -> bool:
    """Forward-check a DRAT proof whose additions are all RUP lemmas."""
    db = _RupDatabase()
    for clause in formula.clauses:
        if clause.is_empty:
            return True
        db.add(tuple(clause.dimacs))
    stats = Counter()
    for deletion, lits in parse_drat(proof_text):
        if deletion:
            stats["deleted" if db.delete(lits) else "missing"] += 1
            continue
        if not db.rup(lits):
            logger.warning("Lemma %s is not RUP", " ".join(map(str, lits)))
            return False
        if not lits:
            logger.debug("RUP check done: %s", dict(stats))
            return True
        db.add(lits)
        stats["lemmas"] += 1
    if db.rup(()):
        return True
    logger.warning("Proof ends without deriving the empty clause")
    return False


def drat_trim_available(binary: str = DRAT_TRIM) -> bool:
    return shutil.which(binary) is not None


def run_drat_trim(cnf_path: Union[str, Path], proof_path: Union[str, Path],
                  binary: str = DRAT_TRIM, timeout: float = 600) -> bool:
    """Run drat-trim; True when it reports the proof as verified."""
    if not drat_trim_available(binary):
        raise FileNotFoundError(f"{binary} not found on PATH")
    try:
        result = subprocess.run([binary, str(cnf_path), str(proof_path)],
                                capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        logger.error("drat-trim timed out on %s", cnf_path)
        return False
    verified = "s VERIFIED" in result.stdout
    if not verified:
        logger.error("drat-trim rejected %s: %s", proof_path, result.stdout.strip().splitlines()[-1:])
    return verified
