"""
Module: oracles
Brute-force ground truth for small instances: spanning-tree enumeration,
best equilibria, price of stability, grid subsidy search and the stable
network design problem.
"""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Iterator, List, NamedTuple, Optional, Tuple

from network_subsidies.errors import CapExceededError, DisconnectedGraphError, UsageError
from network_subsidies.game import broadcast_constraints, is_equilibrium_broadcast
from network_subsidies.model import (
    ONE,
    ZERO,
    BroadcastGame,
    Graph,
    SpanningTree,
    SubsidyAssignment,
    UnionFind,
    format_rational,
    minimum_spanning_tree,
    wgt,
)
from network_subsidies.schemas import PosReport
from network_subsidies.sne import min_subsidy

logger = logging.getLogger(__name__)

DEFAULT_CAP = 1_000_000
GRID_MAX_EDGES = 4
GRID_MAX_DENOMINATOR = 12


def _can_connect(graph: Graph, uf: UnionFind, start: int) -> bool:
    rest = UnionFind(graph.num_nodes)
    for x in range(graph.num_nodes):
        rest.union(x, uf.find(x))
    for edge in graph.edges[start:]:
        rest.union(edge.u, edge.v)
    return rest.components == 1


def iter_spanning_edge_sets(graph: Graph, cap: int = DEFAULT_CAP) -> Iterator[Tuple[int, ...]]:
    """Edge-id tuples of every spanning tree, by contraction and deletion in edge id order.

    Raises:
        DisconnectedGraphError: if no spanning tree exists.
        CapExceededError: when more than ``cap`` trees are produced.
    """
    uf = UnionFind(graph.num_nodes)
    if not _can_connect(graph, uf, 0):
        raise DisconnectedGraphError("graph is not connected")
    chosen: List[int] = []
    count = 0

    def grow(i: int) -> Iterator[Tuple[int, ...]]:
        nonlocal count
        if uf.components == 1:
            count += 1
            if count > cap:
                raise CapExceededError(f"more than {cap} spanning trees", count=count)
            yield tuple(chosen)
            return
        if i == graph.num_edges:
            return
        edge = graph.edges[i]
        if uf.union(edge.u, edge.v):
            chosen.append(edge.id)
            yield from grow(i + 1)
            chosen.pop()
            uf.undo()
        if _can_connect(graph, uf, i + 1):
            yield from grow(i + 1)

    yield from grow(0)
    logger.debug("enumerated %d spanning trees", count)


def enumerate_spanning_trees(graph: Graph, root: int = 0, cap: int = DEFAULT_CAP) -> Iterator[SpanningTree]:
    for ids in iter_spanning_edge_sets(graph, cap):
        yield SpanningTree(graph, ids, root)


class Equilibrium(NamedTuple):
    tree: SpanningTree
    weight: Fraction


def best_equilibrium(game: BroadcastGame, cap: int = DEFAULT_CAP, jobs: int = 1) -> Optional[Equilibrium]:
    """Lightest spanning tree that is an equilibrium without subsidies.

    Trees are tested in (weight, enumeration order); the first stable one wins.
    """
    graph = game.graph
    candidates = sorted(
        ((wgt(graph, ids), k, ids) for k, ids in enumerate(iter_spanning_edge_sets(graph, cap))),
        key=lambda c: (c[0], c[1]),
    )
    logger.info("checking %d spanning trees for stability", len(candidates))

    def stable(candidate) -> bool:
        tree = SpanningTree(graph, candidate[2], game.root)
        return is_equilibrium_broadcast(game, tree).ok

    batch = max(1, jobs) * 8
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for start in range(0, len(candidates), batch):
            chunk = candidates[start : start + batch]
            flags = list(pool.map(stable, chunk)) if jobs > 1 else [stable(c) for c in chunk]
            for candidate, ok in zip(chunk, flags):
                if ok:
                    return Equilibrium(SpanningTree(graph, candidate[2], game.root), candidate[0])
    return None


def price_of_stability(game: BroadcastGame, cap: int = DEFAULT_CAP, jobs: int = 1) -> Optional[Fraction]:
    values = pos_report_values(game, cap, jobs)
    return None if values is None else values[0]


def pos_report_values(game: BroadcastGame, cap: int = DEFAULT_CAP, jobs: int = 1) -> Optional[Tuple[Fraction, Fraction, Fraction]]:
    """(price of stability, best equilibrium weight, MST weight), or None without a stable tree.

    A zero-weight optimum with a zero-weight equilibrium counts as ratio 1.

    Raises:
        UsageError: a positive equilibrium weight over a zero-weight optimum.
    """
    best = best_equilibrium(game, cap, jobs)
    if best is None:
        return None
    mst = minimum_spanning_tree(game.graph, game.root).weight
    if mst == 0:
        if best.weight:
            raise UsageError("price of stability is unbounded over a zero-weight optimum")
        pos = ONE
    else:
        pos = best.weight / mst
    return pos, best.weight, mst


def pos_report(game: BroadcastGame, cap: int = DEFAULT_CAP, jobs: int = 1) -> Optional[PosReport]:
    values = pos_report_values(game, cap, jobs)
    if values is None:
        return None
    pos, best, mst = values
    return PosReport(pos=format_rational(pos), best_eq_weight=format_rational(best), mst_weight=format_rational(mst))


def _grid(weight: Fraction, denominator: int) -> List[Fraction]:
    steps = [Fraction(k, denominator) for k in range(int(weight * denominator) + 1)]
    if steps[-1] != weight:
        steps.append(weight)
    return steps


def grid_min_subsidy(
    game: BroadcastGame, tree: SpanningTree, denominator: int = 12, cap: int = 2_000_000
) -> Fraction:
    """Cheapest enforcing subsidy with every tree-edge value on the 1/D grid (edge weights included).

    Raises:
        UsageError: more than four tree edges or D above 12.
        CapExceededError: the grid has more than ``cap`` points.
    """
    edges = sorted(tree.edge_ids)
    if len(edges) > GRID_MAX_EDGES:
        raise UsageError(f"grid search supports at most {GRID_MAX_EDGES} tree edges, got {len(edges)}")
    if not 1 <= denominator <= GRID_MAX_DENOMINATOR:
        raise UsageError(f"grid denominator must be in 1..{GRID_MAX_DENOMINATOR}")
    axes = [_grid(game.graph.edges[eid].weight, denominator) for eid in edges]
    points = 1
    for axis in axes:
        points *= len(axis)
    if points > cap:
        raise CapExceededError(f"{points} grid points exceed the cap of {cap}", count=points)
    constraints = broadcast_constraints(game, tree)
    best: Optional[Fraction] = None
    for values in itertools.product(*axes):
        cost = sum(values, ZERO)
        if best is not None and cost >= best:
            continue
        b = defaultdict(Fraction, zip(edges, values))
        if all(con.slack(b) >= 0 for con in constraints):
            best = cost
    logger.debug("grid search over %d points: %s", points, best)
    # full subsidy on every tree edge always enforces the tree
    return best if best is not None else tree.weight


class Design(NamedTuple):
    tree: SpanningTree
    subsidies: SubsidyAssignment
    cost: Fraction


def _designs(game: BroadcastGame, weight_bound: Fraction, cap: int) -> List[Tuple[Fraction, Fraction, int, SpanningTree, SubsidyAssignment]]:
    graph = game.graph
    found = []
    for k, ids in enumerate(iter_spanning_edge_sets(graph, cap)):
        weight = wgt(graph, ids)
        if weight > weight_bound:
            continue
        tree = SpanningTree(graph, ids, game.root)
        result = min_subsidy(game, tree, "lp3")
        found.append((result.cost, weight, k, tree, result.subsidies))
    return found


def stable_network_design(
    game: BroadcastGame, budget: Fraction, weight_bound: Fraction, cap: int = DEFAULT_CAP
) -> Optional[Design]:
    """Cheapest-to-enforce tree of weight at most ``weight_bound`` whose subsidy fits ``budget``.

    Ties go to the lighter tree, then to enumeration order.
    """
    fitting = [d for d in _designs(game, weight_bound, cap) if d[0] <= budget]
    if not fitting:
        return None
    cost, _, _, tree, subsidies = min(fitting, key=lambda d: d[:3])
    return Design(tree, subsidies, cost)


def min_subsidy_for_weight(game: BroadcastGame, weight_bound: Fraction, cap: int = DEFAULT_CAP) -> Optional[Fraction]:
    """Smallest budget for which a design of weight at most ``weight_bound`` exists."""
    costs = [d[0] for d in _designs(game, weight_bound, cap)]
    return min(costs) if costs else None
