from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from pacsol.errors import Infeasible, Unbounded
from pacsol.lp import Constraint, LinearProgram, simplex_solve


def lp(n, cons, obj, sense="min"):
    return LinearProgram(n, tuple(cons), tuple(obj), sense)


def test_single_lower_bound():
    sol = simplex_solve(lp(1, [((1,), ">=", 3)], (1,)))
    assert sol.x == (3,) and sol.objective == 3


def test_degenerate_vertex_choice():
    sol = simplex_solve(lp(2, [((1, 1), ">=", 1)], (1, 1)))
    assert sol.objective == 1
    assert sol.x == (1, 0)


def test_infeasible():
    with pytest.raises(Infeasible):
        simplex_solve(lp(1, [((1,), ">=", 1), ((1,), "<=", 0)], (1,)))


def test_unbounded():
    with pytest.raises(Unbounded):
        simplex_solve(lp(2, [((1, -1), "<=", 1)], (1, 1), "max"))


def test_max_with_duals():
    prog = lp(2, [((1, 1), "<=", 4), ((1, 3), "<=", 6)], (3, 2), "max")
    sol = simplex_solve(prog)
    assert sol.objective == 12 and sol.x == (4, 0)
    assert sol.duals == (3, 0)
    assert sum(y * c.rhs for y, c in zip(sol.duals, prog.constraints)) == sol.objective


def test_equality_and_negative_rhs():
    prog = lp(2, [((1, 1), "=", 2), ((-1, 0), "<=", Fraction(-1, 2))], (1, 2))
    sol = simplex_solve(prog)
    assert sol.x == (2, 0) and sol.objective == 2


def test_redundant_equalities():
    prog = lp(2, [((1, 1), "=", 1), ((2, 2), "=", 2)], (0, 1))
    assert simplex_solve(prog).objective == 0


def test_validation():
    with pytest.raises(ValueError):
        Constraint((1,), "<", 1)
    with pytest.raises(ValueError):
        LinearProgram(2, (((1,), "<=", 1),), (1, 1))
    with pytest.raises(ValueError):
        LinearProgram(1, (), (1,), sense="up")


def random_lp(draw_ints, n, m, sense):
    cons = []
    for _ in range(m):
        coeffs = tuple(draw_ints() for _ in range(n))
        cons.append((coeffs, ["<=", ">=", "="][abs(draw_ints()) % 3], draw_ints()))
    # a box keeps every instance bounded
    cons.append((tuple([1] * n), "<=", 10))
    return lp(n, cons, tuple(draw_ints() for _ in range(n)), sense)


@settings(max_examples=80, deadline=None)
@given(st.data(), st.integers(1, 3), st.integers(1, 4), st.sampled_from(["min", "max"]))
def test_matches_vertex_enumeration(data, n, m, sense):
    prog = random_lp(lambda: data.draw(st.integers(-4, 4)), n, m, sense)
    expected = oracles.lp_vertex_optimum(prog)
    if expected is None:
        with pytest.raises(Infeasible):
            simplex_solve(prog)
    else:
        sol = simplex_solve(prog)
        assert sol.objective == expected
        assert prog.is_feasible(sol.x)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_strong_duality_on_packing(data):
    n = data.draw(st.integers(1, 3))
    m = data.draw(st.integers(1, 3))
    rows = [tuple(data.draw(st.integers(0, 3)) for _ in range(n)) for _ in range(m)]
    rhs = [data.draw(st.integers(1, 5)) for _ in range(m)]
    obj = tuple(data.draw(st.integers(0, 4)) for _ in range(n))
    rows.append(tuple([1] * n))
    rhs.append(6)
    prog = lp(n, [(r, "<=", b) for r, b in zip(rows, rhs)], obj, "max")
    sol = simplex_solve(prog)
    assert all(y >= 0 for y in sol.duals)
    assert sum(y * b for y, b in zip(sol.duals, rhs)) == sol.objective
