"""
Module: simplex
Exact two-phase simplex over ``fractions.Fraction``.

Minimises ``objective . x`` subject to rows ``coefficients . x (<=|>=|=) rhs``
and per-variable bounds. Bland's rule (smallest entering index, ratio ties
broken by the smallest basic variable) rules out cycling. The tableau is
stored densely; pivots only touch the non-zero entries of the pivot row.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from network_subsidies.errors import SimplexError

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class Relation(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Row:
    """A sparse constraint row (variable index -> coefficient)."""

    coefficients: Mapping[int, Fraction]
    relation: Relation
    rhs: Fraction

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((Fraction(c) * x[j] for j, c in self.coefficients.items()), ZERO)

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = self.value(x)
        if self.relation is Relation.LE:
            return lhs <= self.rhs
        if self.relation is Relation.GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class LinearProgram:
    """``lower[j]``/``upper[j]`` of ``None`` mean an unbounded end."""

    num_vars: int
    objective: List[Fraction]
    rows: List[Row] = field(default_factory=list)
    lower: List[Optional[Fraction]] = field(default_factory=list)
    upper: List[Optional[Fraction]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.lower:
            self.lower = [ZERO] * self.num_vars
        if not self.upper:
            self.upper = [None] * self.num_vars
        if not (len(self.objective) == len(self.lower) == len(self.upper) == self.num_vars):
            raise ValueError("objective and bounds must have one entry per variable")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"variable {j}: lower bound {lo} exceeds upper bound {hi}")
        for row in self.rows:
            self._check_row(row)

    def _check_row(self, row: Row) -> None:
        for j in row.coefficients:
            if not 0 <= j < self.num_vars:
                raise ValueError(f"row refers to variable {j} of {self.num_vars}")

    def add_row(self, coefficients: Mapping[int, Fraction], relation: Relation, rhs: Fraction) -> None:
        row = Row(dict(coefficients), Relation(relation), Fraction(rhs))
        self._check_row(row)
        self.rows.append(row)

    def feasible(self, x: Sequence[Fraction]) -> bool:
        for j, value in enumerate(x):
            lo, hi = self.lower[j], self.upper[j]
            if (lo is not None and value < lo) or (hi is not None and value > hi):
                return False
        return all(row.holds(x) for row in self.rows)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((Fraction(c) * v for c, v in zip(self.objective, x)), ZERO)


@dataclass(frozen=True)
class LpOutcome:
    status: Status
    assignment: Optional[Tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


INFEASIBLE = LpOutcome(Status.INFEASIBLE)
UNBOUNDED = LpOutcome(Status.UNBOUNDED)


class _Tableau:
    """Canonical tableau: row i has a unit column at ``basis[i]``."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int], width: int) -> None:
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.width = width
        self.pivots = 0

    def pivot(self, r: int, col: int, cost: List[Fraction], value: List[Fraction]) -> None:
        prow = self.rows[r]
        p = prow[col]
        if p != ONE:
            inv = ONE / p
            for j in range(self.width):
                if prow[j]:
                    prow[j] *= inv
            self.rhs[r] *= inv
        nz = [j for j in range(self.width) if prow[j]]
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[col]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[i] -= f * prhs
        f = cost[col]
        if f:
            for j in nz:
                cost[j] -= f * prow[j]
            value[0] -= f * prhs
        self.basis[r] = col
        self.pivots += 1

    def reduced_costs(self, c: List[Fraction]) -> Tuple[List[Fraction], List[Fraction]]:
        cost = list(c)
        value = [ZERO]
        for i, b in enumerate(self.basis):
            cb = c[b]
            if cb:
                row = self.rows[i]
                for j in range(self.width):
                    if row[j]:
                        cost[j] -= cb * row[j]
                value[0] -= cb * self.rhs[i]
        return cost, value

    def run(self, c: List[Fraction], allowed: List[bool]) -> bool:
        """Minimise ``c``; False when unbounded."""
        cost, value = self.reduced_costs(c)
        while True:
            entering = next((j for j in range(self.width) if allowed[j] and cost[j] < 0), None)
            if entering is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering, cost, value)


@dataclass(frozen=True)
class _Substitution:
    # x_j = const + sum(mult * y_k)
    const: Fraction
    terms: Tuple[Tuple[int, Fraction], ...]


def _substitute(lp: LinearProgram) -> Tuple[List[_Substitution], int, List[Tuple[Dict[int, Fraction], Fraction]]]:
    subs: List[_Substitution] = []
    caps: List[Tuple[Dict[int, Fraction], Fraction]] = []
    k = 0
    for lo, hi in zip(lp.lower, lp.upper):
        if lo is not None and hi is not None and lo == hi:
            subs.append(_Substitution(lo, ()))
        elif lo is not None:
            subs.append(_Substitution(lo, ((k, ONE),)))
            if hi is not None:
                caps.append(({k: ONE}, hi - lo))
            k += 1
        elif hi is not None:
            subs.append(_Substitution(hi, ((k, -ONE),)))
            k += 1
        else:
            subs.append(_Substitution(ZERO, ((k, ONE), (k + 1, -ONE))))
            k += 2
    return subs, k, caps


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly.

    Raises:
        SimplexError: if the optimum fails its own exact feasibility check.
    """
    subs, ny, caps = _substitute(lp)

    # (coefficients over y, relation, rhs) with rhs made non-negative
    std: List[Tuple[Dict[int, Fraction], Relation, Fraction]] = []
    for row in list(lp.rows):
        coeffs: Dict[int, Fraction] = {}
        rhs = Fraction(row.rhs)
        for j, a in row.coefficients.items():
            a = Fraction(a)
            if not a:
                continue
            rhs -= a * subs[j].const
            for k, m in subs[j].terms:
                coeffs[k] = coeffs.get(k, ZERO) + a * m
        coeffs = {k: v for k, v in coeffs.items() if v}
        std.append((coeffs, row.relation, rhs))
    std.extend((c, Relation.LE, r) for c, r in caps)

    kept: List[Tuple[Dict[int, Fraction], Relation, Fraction]] = []
    for coeffs, rel, rhs in std:
        if not coeffs:
            ok = (rel is Relation.LE and rhs >= 0) or (rel is Relation.GE and rhs <= 0) or (
                rel is Relation.EQ and rhs == 0
            )
            if not ok:
                return INFEASIBLE
            continue
        if rhs < 0:
            coeffs = {k: -v for k, v in coeffs.items()}
            rhs = -rhs
            rel = {Relation.LE: Relation.GE, Relation.GE: Relation.LE, Relation.EQ: Relation.EQ}[rel]
        kept.append((coeffs, rel, rhs))

    n_slack = sum(1 for _, rel, _ in kept if rel is not Relation.EQ)
    n_art = sum(1 for _, rel, _ in kept if rel is not Relation.LE)
    width = ny + n_slack + n_art
    art_start = ny + n_slack
    rows: List[List[Fraction]] = []
    rhs_col: List[Fraction] = []
    basis: List[int] = []
    s = ny
    a = art_start
    for coeffs, rel, rhs in kept:
        row = [ZERO] * width
        for k, v in coeffs.items():
            row[k] = v
        if rel is Relation.LE:
            row[s] = ONE
            basis.append(s)
            s += 1
        else:
            if rel is Relation.GE:
                row[s] = -ONE
                s += 1
            row[a] = ONE
            basis.append(a)
            a += 1
        rows.append(row)
        rhs_col.append(rhs)

    tab = _Tableau(rows, rhs_col, basis, width)
    allowed = [True] * width

    if n_art:
        phase1 = [ZERO] * art_start + [ONE] * n_art
        tab.run(phase1, allowed)
        infeasibility = sum((tab.rhs[i] for i, b in enumerate(tab.basis) if b >= art_start), ZERO)
        if infeasibility > 0:
            logger.debug("phase 1 ends with infeasibility %s", infeasibility)
            return INFEASIBLE
        _drive_out_artificials(tab, art_start)
        for j in range(art_start, width):
            allowed[j] = False

    c = [ZERO] * width
    for j, cj in enumerate(lp.objective):
        cj = Fraction(cj)
        for k, m in subs[j].terms:
            c[k] += cj * m
    if not tab.run(c, allowed):
        return UNBOUNDED

    y = [ZERO] * width
    for i, b in enumerate(tab.basis):
        y[b] = tab.rhs[i]
    x = tuple(sub.const + sum((m * y[k] for k, m in sub.terms), ZERO) for sub in subs)
    if not lp.feasible(x):
        raise SimplexError("optimal point violates a constraint")
    value = lp.value(x)
    logger.debug("simplex optimum %s after %d pivots (%d rows, %d columns)", value, tab.pivots, len(rows), width)
    return LpOutcome(Status.OPTIMAL, x, value)


def _drive_out_artificials(tab: _Tableau, art_start: int) -> None:
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] < art_start:
            i += 1
            continue
        row = tab.rows[i]
        col = next((j for j in range(art_start) if row[j]), None)
        if col is None:
            # redundant equality
            del tab.rows[i]
            del tab.rhs[i]
            del tab.basis[i]
            continue
        cost = [ZERO] * tab.width
        tab.pivot(i, col, cost, [ZERO])
        i += 1
