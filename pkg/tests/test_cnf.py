import gzip
import io
import random

import pytest

from cnf import (Clause, DimacsParseError, Formula, Literal, Model, check_model, code_to_dimacs,
                 lit_code, load_formula, parse_dimacs, pigeonhole, random_ksat, to_dimacs)


# --- literals and clauses ---
def test_codes_negate_with_xor():
    assert lit_code(3) == 6
    assert lit_code(-3) == 7
    assert lit_code(3) ^ 1 == lit_code(-3)
    assert code_to_dimacs(7) == -3


def test_literal_tuple():
    lit = Literal.from_dimacs(-4)
    assert lit == Literal(4, False)
    assert (-lit).dimacs == 4
    assert lit.code == lit_code(-4)


def test_clause_drops_duplicates_and_marks_tautology():
    assert Clause.of([1, 1, -2]).dimacs == [1, -2]
    assert not Clause.of([1, -2]).tautology
    assert Clause.of([1, -1, 2]).tautology


# --- parsing ---
def test_parse_basic():
    f = parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0\n")
    assert f.num_vars == 3
    assert [c.dimacs for c in f.clauses] == [[1, -2], [2, 3]]


def test_comments_are_skipped():
    f = parse_dimacs("c comment\np cnf 1 1\n1 0\n")
    assert f.num_vars == 1
    assert [c.dimacs for c in f.clauses] == [[1]]


def test_clause_may_span_lines_and_satlib_trailer_is_ignored():
    f = parse_dimacs("p cnf 3 1\n1 2\n3 0\n%\n0\n")
    assert [c.dimacs for c in f.clauses] == [[1, 2, 3]]


def test_variable_out_of_range():
    with pytest.raises(DimacsParseError, match="variable 3 exceeds declared 2") as exc:
        parse_dimacs("p cnf 2 1\n3 0\n")
    assert exc.value.line_no == 2


@pytest.mark.parametrize("text, line_no", [
    ("p dnf 2 1\n1 0\n", 1),
    ("p cnf 2 2\n1 0\n-1 2\n", 3),
])
def test_malformed_input_reports_line(text, line_no):
    with pytest.raises(DimacsParseError) as exc:
        parse_dimacs(text)
    assert exc.value.line_no == line_no


def test_clause_before_header():
    with pytest.raises(DimacsParseError):
        parse_dimacs("1 2 0\np cnf 2 1\n")


def test_empty_clause_makes_formula_trivially_unsat():
    assert parse_dimacs("p cnf 1 1\n0\n").trivially_unsat


def test_clause_count_mismatch_only_warns(caplog):
    with caplog.at_level("WARNING", logger="cnf"):
        f = parse_dimacs("p cnf 2 3\n1 0\n2 0\n")
    assert len(f.clauses) == 2
    assert any(r.levelname == "WARNING" for r in caplog.records)


def test_to_dimacs_reparses_to_the_same_clauses():
    f = random_ksat(12, 40, 3, random.Random(7))
    again = parse_dimacs(to_dimacs(f, comments=["generated"]))
    assert again.num_vars == f.num_vars
    assert [c.dimacs for c in again.clauses] == [c.dimacs for c in f.clauses]


def test_load_formula_reads_gzip(tmp_path):
    path = tmp_path / "tiny.cnf.gz"
    with gzip.open(path, "wt") as fh:
        fh.write("p cnf 2 1\n1 -2 0\n")
    assert [c.dimacs for c in load_formula(str(path)).clauses] == [[1, -2]]


def test_load_formula_fixture(fixtures_dir):
    f = load_formula(str(fixtures_dir / "fuip_fixture.cnf"))
    assert (f.num_vars, len(f.clauses)) == (5, 6)


# --- models ---
def test_model_satisfies():
    assert check_model(Formula.from_lists(2, [[1, -2]]), Model((True, True)))


@pytest.mark.parametrize("value", [True, False])
def test_unsatisfiable_formula_fails_every_model(value):
    assert not check_model(Formula.from_lists(1, [[1], [-1]]), Model((value,)))


def test_empty_formula():
    assert check_model(Formula(0, []), Model(()))


def test_model_dimacs():
    assert Model((True, False, True)).dimacs() == [1, -2, 3]


# --- generators ---
def test_random_ksat_shape():
    f = random_ksat(20, 85, 3, random.Random(1))
    assert len(f.clauses) == 85
    assert all(len({lit.variable for lit in c.literals}) == 3 for c in f.clauses)


def test_pigeonhole_size():
    f = pigeonhole(3, 2)
    assert f.num_vars == 6
    assert len(f.clauses) == 3 + 2 * 3


def test_writer_to_stream():
    out = io.StringIO()
    out.write(to_dimacs(Formula.from_lists(1, [[1]])))
    assert out.getvalue() == "p cnf 1 1\n1 0\n"
