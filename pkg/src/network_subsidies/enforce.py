"""
Module: enforce
Subsidies for minimum spanning trees of broadcast games.

``enforce_fractional`` spends wgt(T)/e: the graph is split into levels whose
edge weights are 0 or a single increment c_j, and on each level subsidies
are packed from the leaves upward until every root path has virtual cost at
most c_j. The virtual cost of a heavy edge used by m heavy players and
carrying subsidy y is ``c * ln(m / (m - 1 + y / c))``.

``min_integral_subsidy_exact`` is the exhaustive all-or-nothing oracle.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from network_subsidies.errors import (
    CapExceededError,
    InvalidSubsidyError,
    MethodMismatchError,
    NotMinimumSpanningTreeError,
    SelfCheckError,
    UnknownEdgeError,
)
from network_subsidies.game import DeviationConstraint, broadcast_constraints, is_equilibrium_broadcast
from network_subsidies.model import ZERO, BroadcastGame, Graph, SpanningTree, SubsidyAssignment, is_mst

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True)
class Level:
    """One copy G^j of the graph with weights in {0, increment}.

    ``heavy`` holds the graph edges of weight ``increment`` in this copy;
    ``m[a]`` counts the heavy players below heavy tree edge ``a``.
    """

    index: int
    threshold: Fraction
    increment: Fraction
    heavy: FrozenSet[int]
    m: Dict[int, int]

    def weight(self, eid: int) -> Fraction:
        return self.increment if eid in self.heavy else ZERO


def decompose(graph: Graph, tree: SpanningTree) -> List[Level]:
    """Split weights into levels c_1 = w(1), c_j = w(j) - w(j-1) over the distinct non-zero weights.

    Raises:
        NotMinimumSpanningTreeError: if ``tree`` is not an MST of ``graph``.
    """
    if not is_mst(graph, tree):
        raise NotMinimumSpanningTreeError("tree is not a minimum spanning tree")
    thresholds = sorted({e.weight for e in graph.edges if e.weight > 0})
    levels: List[Level] = []
    previous = ZERO
    for j, threshold in enumerate(thresholds, start=1):
        heavy = frozenset(e.id for e in graph.edges if e.weight >= threshold)
        below = [0] * graph.num_nodes
        m: Dict[int, int] = {}
        for v in reversed(tree.order[1:]):
            a = tree.parent_edge[v]
            if a in heavy:
                below[v] += 1
                m[a] = below[v]
            below[tree.parent[v]] += below[v]
        level = Level(j, threshold, threshold - previous, heavy, m)
        if not is_mst(graph, tree, weight=level.weight):
            raise NotMinimumSpanningTreeError(f"tree is not minimum in level {j}")
        levels.append(level)
        previous = threshold
    return levels


def virtual_cost(level: Level, eid: int, y: float) -> float:
    """c * ln(m / (m - 1 + y / c)) for heavy tree edges, 0 for light ones.

    Raises:
        InvalidSubsidyError: if y is outside [0, c].
    """
    c = float(level.increment)
    if y < 0 or y > c:
        raise InvalidSubsidyError(f"virtual cost needs 0 <= y <= {c}, got {y}")
    if eid not in level.heavy:
        return 0.0
    if eid not in level.m:
        raise UnknownEdgeError(f"edge {eid} is not a tree edge")
    m = level.m[eid]
    denominator = m - 1 + y / c
    if denominator <= 0:
        return INF
    return c * math.log(m / denominator)


def packed_virtual_cost(c: float, top: int, count: int, amount: float) -> float:
    """Virtual cost of a path whose heavy edges carry m = top-count+1..top with ``amount`` packed least-crowded-first."""
    denominator = top - count + amount / c
    if denominator <= 0:
        return INF
    return c * math.log(top / denominator)


def least_crowded_packing(level: Level, edges: Iterable[int], amount: float) -> Dict[int, float]:
    """Spread ``amount`` over the heavy edges of ``edges``, smallest m first, at most c per edge.

    Light edges get nothing. Whatever does not fit is dropped.
    """
    c = float(level.increment)
    heavy = sorted((level.m[a], a) for a in edges if a in level.heavy)
    y: Dict[int, float] = {}
    left = amount
    for _, a in heavy:
        if left <= 0:
            break
        y[a] = min(c, left)
        left -= y[a]
    return y


class FloatSubsidy:
    """Float subsidies produced by the 1/e procedure."""

    def __init__(self, values: Optional[Dict[int, float]] = None, tolerance: float = 1e-9) -> None:
        self.values: Dict[int, float] = dict(values or {})
        self.tolerance = tolerance

    def __getitem__(self, eid: int) -> float:
        return self.values.get(eid, 0.0)

    def items(self) -> List[Tuple[int, float]]:
        return sorted(self.values.items())

    @property
    def total(self) -> float:
        return math.fsum(self.values.values())

    def to_assignment(self, graph: Graph) -> SubsidyAssignment:
        """Exact rational copy; values within ``tolerance`` of 0 or w_a snap to it.

        Raises:
            InvalidSubsidyError: if a value lies further than ``tolerance`` outside [0, w_a].
        """
        exact = {}
        for eid, value in self.values.items():
            w = graph.edge(eid).weight
            if value < -self.tolerance or value > float(w) + self.tolerance:
                raise InvalidSubsidyError(f"subsidy {value!r} on edge {eid} is outside [0, {w}]")
            if abs(value) <= self.tolerance:
                exact[eid] = ZERO
            elif abs(value - float(w)) <= self.tolerance:
                exact[eid] = w
            else:
                exact[eid] = min(max(Fraction(value).limit_denominator(10**12), ZERO), w)
        return SubsidyAssignment(graph, exact)


def enforce_level(level: Level, tree: SpanningTree) -> FloatSubsidy:
    """Subsidies for one level.

    Heavy edges whose upper endpoint already has root-path virtual cost >= c
    get c; the cut edges where the virtual cost first reaches c get the
    amount that makes it exactly c; the rest get nothing.
    """
    c = float(level.increment)
    prefix = [0.0] * tree.graph.num_nodes
    values: Dict[int, float] = {}
    for v in tree.order[1:]:
        a = tree.parent_edge[v]
        p = tree.parent[v]
        if a not in level.heavy:
            prefix[v] = prefix[p]
            continue
        prefix[v] = prefix[p] + virtual_cost(level, a, 0.0)
        if prefix[p] >= c:
            values[a] = c
        elif prefix[v] >= c:
            m = level.m[a]
            b = c * (1 - m * (1 - math.exp(prefix[p] / c - 1)))
            values[a] = min(max(b, 0.0), c)
    return FloatSubsidy(values)


class FractionalResult(NamedTuple):
    subsidies: FloatSubsidy
    total: float
    levels: List[Level]


def enforce_fractional(game: BroadcastGame, tree: SpanningTree, tolerance: float = 1e-9) -> FractionalResult:
    """Sum the per-level subsidies; the total is wgt(T)/e.

    Raises:
        MethodMismatchError: for general games.
        NotMinimumSpanningTreeError: if ``tree`` is not an MST.
    """
    if not isinstance(game, BroadcastGame):
        raise MethodMismatchError("fractional enforcement needs a broadcast game")
    graph = game.graph
    levels = decompose(graph, tree)
    summed: Dict[int, float] = {}
    for level in levels:
        for eid, value in enforce_level(level, tree).values.items():
            summed[eid] = summed.get(eid, 0.0) + value
    clamped = {eid: min(max(v, 0.0), float(graph.edges[eid].weight)) for eid, v in summed.items() if v > 0}
    subsidies = FloatSubsidy(clamped, tolerance)
    logger.info("fractional enforcement over %d levels spends %.12g", len(levels), subsidies.total)
    return FractionalResult(subsidies, subsidies.total, levels)


# -- all-or-nothing search -------------------------------------------------


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


class _ScaledRows(NamedTuple):
    # rows[i]: integer contribution of subsidising candidate k, limit: integer rhs
    deltas: List[List[Tuple[int, int]]]
    limits: List[int]
    costs: List[int]


def _scale(graph: Graph, constraints: Sequence[DeviationConstraint], candidates: Sequence[int]) -> _ScaledRows:
    limits: List[int] = []
    deltas: List[List[Tuple[int, int]]] = [[] for _ in candidates]
    for r, con in enumerate(constraints):
        parts = [con.coefficients.get(a, ZERO) * graph.edges[a].weight for a in candidates]
        scale = _lcm([con.rhs.denominator] + [p.denominator for p in parts])
        limits.append(int(con.rhs * scale))
        for k, p in enumerate(parts):
            if p:
                deltas[k].append((r, int(p * scale)))
    denom = _lcm(graph.edges[a].weight.denominator for a in candidates)
    costs = [int(graph.edges[a].weight * denom) for a in candidates]
    return _ScaledRows(deltas, limits, costs)


def _scan(rows: _ScaledRows, high: int, low_bits: int, total_bits: int) -> Optional[Tuple[int, Tuple[int, ...], int]]:
    """Gray-code walk over the low bits with the high bits fixed to ``high``."""
    sums = [0] * len(rows.limits)
    cost = 0
    mask = 0
    for k in range(low_bits, total_bits):
        if high >> (k - low_bits) & 1:
            mask |= 1 << k
            cost += rows.costs[k]
            for r, d in rows.deltas[k]:
                sums[r] += d
    violated = sum(1 for s, lim in zip(sums, rows.limits) if s > lim)
    best: Optional[Tuple[int, Tuple[int, ...], int]] = None

    def consider() -> None:
        nonlocal best
        if violated:
            return
        key = (cost, tuple(k for k in range(total_bits) if mask >> k & 1))
        if best is None or key < best[:2]:
            best = (key[0], key[1], mask)

    consider()
    for step in range(1, 1 << low_bits):
        k = (step & -step).bit_length() - 1
        bit = 1 << k
        sign = -1 if mask & bit else 1
        mask ^= bit
        cost += sign * rows.costs[k]
        for r, d in rows.deltas[k]:
            before = sums[r] > rows.limits[r]
            sums[r] += sign * d
            after = sums[r] > rows.limits[r]
            violated += after - before
        consider()
    return best


def _scan_job(args) -> Optional[Tuple[int, Tuple[int, ...], int]]:
    return _scan(*args)


class IntegralResult(NamedTuple):
    subsidies: SubsidyAssignment
    cost: Fraction


def _candidates(tree: SpanningTree, candidates: Optional[Iterable[int]]) -> List[int]:
    if candidates is None:
        return sorted(tree.edge_ids)
    chosen = sorted(set(candidates))
    for eid in chosen:
        tree.graph.edge(eid)
    return chosen


def min_integral_subsidy_exact(
    game: BroadcastGame,
    tree: SpanningTree,
    candidates: Optional[Iterable[int]] = None,
    cap: int = 24,
    jobs: int = 1,
) -> Optional[IntegralResult]:
    """Cheapest all-or-nothing subsidy over ``candidates`` (tree edges by default).

    Ties go to the lexicographically smallest set of subsidised edge ids.
    Returns None when no subset enforces the tree.

    Raises:
        CapExceededError: if there are more than ``cap`` candidates.
    """
    cand = _candidates(tree, candidates)
    if len(cand) > cap:
        raise CapExceededError(f"{len(cand)} candidate edges exceed the cap of {cap}", count=len(cand))
    rows = _scale(game.graph, broadcast_constraints(game, tree), cand)
    total_bits = len(cand)
    high_bits = 0
    if jobs > 1 and total_bits > 10:
        high_bits = min(total_bits - 10, max(1, (jobs * 4 - 1).bit_length()))
    low_bits = total_bits - high_bits
    tasks = [(rows, high, low_bits, total_bits) for high in range(1 << high_bits)]
    if high_bits:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(_scan_job, tasks))
    else:
        found = [_scan_job(t) for t in tasks]
    found = [f for f in found if f is not None]
    if not found:
        logger.info("no all-or-nothing assignment over %d candidates enforces the tree", total_bits)
        return None
    _, positions, _ = min(found, key=lambda f: (f[0], f[1]))
    chosen = [cand[k] for k in positions]
    subsidies = SubsidyAssignment.full(game.graph, chosen, integral=True)
    if not is_equilibrium_broadcast(game, tree, subsidies).ok:
        raise SelfCheckError("all-or-nothing winner fails the exact equilibrium check")
    return IntegralResult(subsidies, subsidies.total)


def iter_enforcing_integral(
    game: BroadcastGame, tree: SpanningTree, candidates: Optional[Iterable[int]] = None, cap: int = 24
) -> Iterator[FrozenSet[int]]:
    """Every enforcing all-or-nothing subset of ``candidates``, in binary-counting order."""
    cand = _candidates(tree, candidates)
    if len(cand) > cap:
        raise CapExceededError(f"{len(cand)} candidate edges exceed the cap of {cap}", count=len(cand))
    rows = _scale(game.graph, broadcast_constraints(game, tree), cand)
    for mask in range(1 << len(cand)):
        sums = list(rows.limits)
        for k in range(len(cand)):
            if mask >> k & 1:
                for r, d in rows.deltas[k]:
                    sums[r] -= d
        if all(s >= 0 for s in sums):
            yield frozenset(cand[k] for k in range(len(cand)) if mask >> k & 1)
