import itertools
import random
from fractions import Fraction

import pytest

import network_subsidies.simplex as sx


def test_covering_lp():
    lp = sx.LinearProgram(2, [Fraction(1), Fraction(2)])
    lp.add_row({0: 1, 1: 1}, sx.Relation.GE, 1)
    lp.add_row({0: 1}, sx.Relation.LE, Fraction(1, 3))
    out = sx.solve(lp)
    assert out.optimal
    assert out.assignment == (Fraction(1, 3), Fraction(2, 3))
    assert out.value == Fraction(5, 3)


def test_equality_and_free_variable():
    lp = sx.LinearProgram(2, [Fraction(1), Fraction(0)], lower=[None, Fraction(0)], upper=[None, Fraction(4)])
    lp.add_row({0: 1, 1: 1}, sx.Relation.EQ, 1)
    out = sx.solve(lp)
    assert out.optimal
    assert out.assignment == (Fraction(-3), Fraction(4))


def test_infeasible():
    lp = sx.LinearProgram(1, [Fraction(1)])
    lp.add_row({0: 1}, sx.Relation.GE, 2)
    lp.add_row({0: 1}, sx.Relation.LE, 1)
    assert sx.solve(lp).status is sx.Status.INFEASIBLE


def test_unbounded():
    lp = sx.LinearProgram(1, [Fraction(-1)])
    assert sx.solve(lp).status is sx.Status.UNBOUNDED


def test_empty_row_is_checked():
    lp = sx.LinearProgram(1, [Fraction(1)])
    lp.add_row({0: 0}, sx.Relation.GE, 1)
    assert sx.solve(lp).status is sx.Status.INFEASIBLE


def test_redundant_equalities():
    lp = sx.LinearProgram(2, [Fraction(1), Fraction(1)])
    lp.add_row({0: 1, 1: 1}, sx.Relation.EQ, 2)
    lp.add_row({0: 2, 1: 2}, sx.Relation.EQ, 4)
    out = sx.solve(lp)
    assert out.optimal and out.value == 2


def test_degenerate_lp_terminates():
    # Beale's cycling example
    lp = sx.LinearProgram(
        4,
        [Fraction(-3, 4), Fraction(150), Fraction(-1, 50), Fraction(6)],
    )
    lp.add_row({0: Fraction(1, 4), 1: -60, 2: Fraction(-1, 25), 3: 9}, sx.Relation.LE, 0)
    lp.add_row({0: Fraction(1, 2), 1: -90, 2: Fraction(-1, 50), 3: 3}, sx.Relation.LE, 0)
    lp.add_row({2: 1}, sx.Relation.LE, 1)
    out = sx.solve(lp)
    assert out.optimal
    assert out.value == Fraction(-1, 20)


def test_bad_bounds_and_rows():
    with pytest.raises(ValueError):
        sx.LinearProgram(1, [Fraction(1)], lower=[Fraction(2)], upper=[Fraction(1)])
    lp = sx.LinearProgram(1, [Fraction(1)])
    with pytest.raises(ValueError):
        lp.add_row({3: 1}, sx.Relation.LE, 1)


def test_matches_scipy_on_random_boxes():
    linprog = pytest.importorskip("scipy.optimize").linprog
    rng = random.Random(1)
    for _ in range(40):
        n = rng.randint(1, 5)
        c = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(n)]
        lp = sx.LinearProgram(n, c, upper=[Fraction(rng.randint(1, 5)) for _ in range(n)])
        a_ub, b_ub = [], []
        for _ in range(rng.randint(1, 5)):
            row = {j: Fraction(rng.randint(-3, 3)) for j in range(n)}
            rhs = Fraction(rng.randint(0, 8))
            lp.add_row(row, sx.Relation.LE, rhs)
            a_ub.append([float(row[j]) for j in range(n)])
            b_ub.append(float(rhs))
        out = sx.solve(lp)
        assert out.optimal
        ref = linprog(
            [float(x) for x in c],
            A_ub=a_ub,
            b_ub=b_ub,
            bounds=[(0, float(u)) for u in lp.upper],
            method="highs",
        )
        assert float(out.value) == pytest.approx(ref.fun, abs=1e-7)


def _solve_square(matrix, rhs):
    """Gauss-Jordan over Fractions; None when singular."""
    n = len(rhs)
    rows = [list(r) + [v] for r, v in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][n] / rows[i][i] for i in range(n)]


def vertex_optimum(lp):
    """Minimum over every basic point of a boxed LP: k active rows, k free columns, the rest at a bound."""
    n = lp.num_vars
    best = None
    for k in range(min(len(lp.rows), n) + 1):
        for active in itertools.combinations(lp.rows, k):
            for free in itertools.combinations(range(n), k):
                fixed = [j for j in range(n) if j not in free]
                for ends in itertools.product((0, 1), repeat=len(fixed)):
                    x = [Fraction(0)] * n
                    for j, end in zip(fixed, ends):
                        x[j] = lp.upper[j] if end else lp.lower[j]
                    matrix = [[Fraction(row.coefficients.get(j, 0)) for j in free] for row in active]
                    rhs = [row.rhs - sum((row.coefficients.get(j, 0) * x[j] for j in fixed), Fraction(0)) for row in active]
                    solved = _solve_square(matrix, rhs)
                    if solved is None:
                        continue
                    for j, value in zip(free, solved):
                        x[j] = value
                    if lp.feasible(x):
                        value = lp.value(x)
                        if best is None or value < best:
                            best = value
    return best


def random_boxed_lp(rng):
    """Five bounded variables; the origin is feasible, so an optimum exists."""
    c = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(5)]
    lp = sx.LinearProgram(5, c, upper=[Fraction(rng.randint(1, 5)) for _ in range(5)])
    for _ in range(rng.randint(1, 3)):
        row = {j: Fraction(rng.randint(-3, 3)) for j in range(5)}
        if rng.random() < 0.7:
            lp.add_row(row, sx.Relation.LE, rng.randint(1, 8))
        else:
            lp.add_row(row, sx.Relation.GE, -rng.randint(0, 4))
    return lp


def test_matches_vertex_enumeration():
    rng = random.Random(2)
    for _ in range(200):
        lp = random_boxed_lp(rng)
        out = sx.solve(lp)
        assert out.optimal
        assert lp.feasible(out.assignment)
        assert out.value == vertex_optimum(lp)


def test_optimum_beats_random_feasible_points():
    rng = random.Random(3)
    for _ in range(20):
        lp = random_boxed_lp(rng)
        out = sx.solve(lp)
        for _ in range(100):
            point = [u * Fraction(rng.randint(0, 16), 16) for u in lp.upper]
            scale = Fraction(1)
            while not lp.feasible([scale * v for v in point]):
                scale /= 2
            assert out.value <= lp.value([scale * v for v in point])
