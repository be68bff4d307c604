import time
from itertools import combinations, product

from hypothesis import given
from hypothesis import strategies as st

from fcmverify.sat import Solver, luby, solve_cnf, write_dimacs


def brute_force(clauses, n):
    for bits in product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def pigeonhole(pigeons, holes):
    var = lambda p, h: p * holes + h + 1
    clauses = [[var(p, h) for h in range(holes)] for p in range(pigeons)]
    for h in range(holes):
        for p, q in combinations(range(pigeons), 2):
            clauses.append([-var(p, h), -var(q, h)])
    return clauses, pigeons * holes


def test_luby_prefix():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_pigeonhole():
    clauses, n = pigeonhole(6, 5)
    assert solve_cnf(clauses, n)[0] is False
    clauses, n = pigeonhole(5, 5)
    status, model = solve_cnf(clauses, n)
    assert status and all(any(model[abs(l) - 1] == (l > 0) for l in c) for c in clauses)


def test_empty_clause_and_trivial_inputs():
    assert solve_cnf([], 3)[0] is True
    assert solve_cnf([[]], 1)[0] is False
    assert solve_cnf([[1], [-1]], 1)[0] is False
    assert solve_cnf([[1, -1]], 1)[0] is True


def test_deadline_in_the_past_gives_up():
    clauses, n = pigeonhole(9, 8)
    s = Solver(n)
    for c in clauses:
        s.add_clause(c)
    assert s.solve(deadline=time.monotonic() - 1) is None


def test_dimacs_output(tmp_path):
    path = tmp_path / "x.cnf"
    write_dimacs([[1, -2], [2]], 2, path, ["size 1"])
    assert path.read_text() == "c size 1\np cnf 2 2\n1 -2 0\n2 0\n"


clause = st.lists(st.integers(1, 8).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3)


@given(st.lists(clause, max_size=40))
def test_agrees_with_brute_force(clauses):
    status, model = solve_cnf(clauses, 8)
    assert status == brute_force(clauses, 8)
    if status:
        assert all(any(model[abs(l) - 1] == (l > 0) for l in c) for c in clauses)
