"""
Module: sne
Minimum fractional subsidies that make a target state an equilibrium.

Three formulations are solved with the exact simplex:

* ``lp3``: broadcast games and spanning trees; one row per non-tree
  deviation through a single edge.
* ``lp2``: any game; shortest-path potentials per player stand in for the
  exponentially many path constraints.
* ``rowgen``: the path-constraint LP, grown one violated path at a time with
  a best-response oracle.

Subsidy variables exist only on edges the target state uses; every other
edge keeps b = 0.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from network_subsidies.errors import IterationCapError, MethodMismatchError, SimplexError
from network_subsidies.game import (
    best_response,
    broadcast_constraints,
    is_equilibrium_broadcast,
    is_equilibrium_general,
    player_cost,
)
from network_subsidies.model import ZERO, BroadcastGame, Game, SpanningTree, State, SubsidyAssignment
from network_subsidies.simplex import LinearProgram, Relation, solve

logger = logging.getLogger(__name__)


class Method(str, Enum):
    LP3 = "lp3"
    LP2 = "lp2"
    ROWGEN = "rowgen"


@dataclass
class SneProgram:
    """A built LP plus the edge behind each subsidy variable (variables ``0..len(edges)-1``)."""

    lp: LinearProgram
    edges: List[int]

    def subsidies(self, game: Game, assignment: Sequence[Fraction]) -> SubsidyAssignment:
        return SubsidyAssignment(game.graph, {eid: assignment[k] for k, eid in enumerate(self.edges)})


class SubsidyResult(NamedTuple):
    subsidies: SubsidyAssignment
    cost: Fraction


def _require_broadcast_tree(game: Game, target: Union[SpanningTree, State]) -> SpanningTree:
    if not isinstance(game, BroadcastGame):
        raise MethodMismatchError("lp3 needs a broadcast game")
    if not isinstance(target, SpanningTree):
        raise MethodMismatchError("lp3 needs a spanning tree target")
    return target


def _as_state(game: Game, target: Union[SpanningTree, State]) -> State:
    if isinstance(target, State):
        return target
    if not isinstance(game, BroadcastGame):
        raise MethodMismatchError("a spanning tree target needs a broadcast game")
    return State.from_tree(game, target)


def build_lp_broadcast(game: BroadcastGame, tree: SpanningTree) -> SneProgram:
    """LP over tree-edge subsidies: minimise their sum subject to all single-edge deviations."""
    _require_broadcast_tree(game, tree)
    edges = sorted(tree.edge_ids)
    var = {eid: k for k, eid in enumerate(edges)}
    graph = game.graph
    lp = LinearProgram(
        num_vars=len(edges),
        objective=[Fraction(1)] * len(edges),
        lower=[ZERO] * len(edges),
        upper=[graph.edges[eid].weight for eid in edges],
    )
    for con in broadcast_constraints(game, tree):
        coeffs = {var[a]: c for a, c in con.coefficients.items() if a in var}
        lp.add_row(coeffs, Relation.LE, con.rhs)
    return SneProgram(lp, edges)


def build_lp_general(game: Game, state: State) -> SneProgram:
    """Potential-based LP.

    Variables: b_a for established edges, then pi_i(v) for every player i and
    node v (with pi_i(s_i) fixed to 0). For each edge and orientation
    pi_i(v) - pi_i(u) <= (w_a - b_a) / (n_a + 1 - n^i_a), and
    pi_i(t_i) >= co_i(T; b).
    """
    graph = game.graph
    edges = sorted(state.established())
    var = {eid: k for k, eid in enumerate(edges)}
    nb = len(edges)
    nv = graph.num_nodes
    num_vars = nb + state.num_players * nv
    lower: List[Optional[Fraction]] = [ZERO] * num_vars
    upper: List[Optional[Fraction]] = [graph.edges[eid].weight for eid in edges] + [None] * (num_vars - nb)
    for i, (s, _) in enumerate(state.pairs):
        upper[nb + i * nv + s] = ZERO
    lp = LinearProgram(num_vars, [Fraction(1)] * nb + [ZERO] * (num_vars - nb), [], lower, upper)

    for i, (s, t) in enumerate(state.pairs):
        base = nb + i * nv
        mine = state.path_sets[i]
        for edge in graph.edges:
            share = state.n(edge.id) + (0 if edge.id in mine else 1)
            rhs = edge.weight / share
            for u, v in ((edge.u, edge.v), (edge.v, edge.u)):
                coeffs: Dict[int, Fraction] = {base + v: Fraction(1), base + u: Fraction(-1)}
                if edge.id in var:
                    coeffs[var[edge.id]] = Fraction(1, share)
                lp.add_row(coeffs, Relation.LE, rhs)
        coeffs = {base + t: Fraction(1)}
        rhs = ZERO
        for a in state.paths[i]:
            coeffs[var[a]] = coeffs.get(var[a], ZERO) + Fraction(1, state.usage[a])
            rhs += graph.edges[a].weight / state.usage[a]
        lp.add_row(coeffs, Relation.GE, rhs)
    return SneProgram(lp, edges)


def _solve_program(program: SneProgram, game: Game) -> SubsidyResult:
    outcome = solve(program.lp)
    if not outcome.optimal:
        raise SimplexError(f"subsidy LP reported {outcome.status.value}")
    values = outcome.assignment[: len(program.edges)]
    subsidies = program.subsidies(game, values)
    return SubsidyResult(subsidies, subsidies.total)


def _path_row(
    game: Game, state: State, player: int, path: Sequence[int], var: Dict[int, int]
) -> Tuple[Dict[int, Fraction], Fraction]:
    # current cost <= deviation cost, rearranged to coefficients . b <= rhs
    graph = game.graph
    mine = state.path_sets[player]
    coeffs: Dict[int, Fraction] = {}
    rhs = ZERO
    for a in state.paths[player]:
        share = Fraction(1, state.usage[a])
        coeffs[var[a]] = coeffs.get(var[a], ZERO) - share
        rhs -= graph.edges[a].weight * share
    for a in path:
        share = Fraction(1, state.n(a) + (0 if a in mine else 1))
        if a in var:
            coeffs[var[a]] = coeffs.get(var[a], ZERO) + share
        rhs += graph.edges[a].weight * share
    return {k: c for k, c in coeffs.items() if c}, rhs


def solve_sne_rowgen(game: Game, target: Union[SpanningTree, State], jobs: int = 1, iteration_factor: float = 10) -> SubsidyResult:
    """Constraint generation with a best-response separation oracle.

    Raises:
        IterationCapError: after ``iteration_factor * n * |E|`` rounds (at least one); the
            exception carries the last candidate ``SubsidyResult``.
    """
    state = _as_state(game, target)
    graph = game.graph
    edges = sorted(state.established())
    var = {eid: k for k, eid in enumerate(edges)}
    program = SneProgram(
        LinearProgram(
            num_vars=len(edges),
            objective=[Fraction(1)] * len(edges),
            lower=[ZERO] * len(edges),
            upper=[graph.edges[eid].weight for eid in edges],
        ),
        edges,
    )
    cap = max(1, int(iteration_factor * max(1, state.num_players) * max(1, graph.num_edges)))
    players = range(state.num_players)
    result: Optional[SubsidyResult] = None
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for rnd in range(1, cap + 1):
            result = _solve_program(program, game)
            b = result.subsidies

            def oracle(i: int):
                path, cost = best_response(game, state, b, i)
                return path if cost < player_cost(game, state, b, i) else None

            found = list(pool.map(oracle, players)) if jobs > 1 else [oracle(i) for i in players]
            added = 0
            for i, path in enumerate(found):
                if path is not None:
                    coeffs, rhs = _path_row(game, state, i, path, var)
                    program.lp.add_row(coeffs, Relation.LE, rhs)
                    added += 1
            logger.debug("row generation round %d: cost %s, %d rows added", rnd, result.cost, added)
            if not added:
                return result
    raise IterationCapError(f"row generation did not converge within {cap} rounds", partial=result)


def min_subsidy(
    game: Game,
    target: Union[SpanningTree, State],
    method: Union[Method, str] = Method.LP3,
    jobs: int = 1,
    iteration_factor: float = 10,
) -> SubsidyResult:
    """Minimum total fractional subsidies enforcing ``target``; the result is re-verified.

    Raises:
        MethodMismatchError: ``lp3`` on a general game or a non-tree target.
    """
    method = Method(method)
    if method is Method.LP3:
        tree = _require_broadcast_tree(game, target)
        result = _solve_program(build_lp_broadcast(game, tree), game)
        verdict = is_equilibrium_broadcast(game, tree, result.subsidies)
    else:
        state = _as_state(game, target)
        if method is Method.LP2:
            result = _solve_program(build_lp_general(game, state), game)
        else:
            result = solve_sne_rowgen(game, state, jobs=jobs, iteration_factor=iteration_factor)
        verdict = is_equilibrium_general(game, state, result.subsidies)
    if not verdict.ok:
        raise SimplexError(f"{method.value} subsidies do not enforce the target (player {verdict.label})")
    logger.info("%s minimum subsidy %s", method.value, result.cost)
    return result
