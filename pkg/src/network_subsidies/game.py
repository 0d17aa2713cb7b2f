"""
Module: game
Costs, potential, best responses and equilibrium checks for network design
games under fair cost sharing, optionally extended with subsidies.

Subsidy arguments accept anything indexable by edge id: a
``SubsidyAssignment``, a float-valued ``FloatSubsidy`` or ``None`` (no
subsidies). With exact subsidies every comparison is exact; ``tol`` only
matters for float subsidies.
"""
from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from network_subsidies.errors import DynamicsCapError, InvalidStateError, NotSpanningTreeError
from network_subsidies.model import (
    ZERO,
    BroadcastGame,
    Game,
    SpanningTree,
    State,
    format_rational,
)
from network_subsidies.schemas import VerdictRecord, dump

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]

_HARMONIC: List[Fraction] = [ZERO]


def harmonic(n: int) -> Fraction:
    """H_n = 1 + 1/2 + ... + 1/n, with H_0 = 0."""
    if n < 0:
        raise ValueError("harmonic numbers are defined for n >= 0")
    while len(_HARMONIC) <= n:
        _HARMONIC.append(_HARMONIC[-1] + Fraction(1, len(_HARMONIC)))
    return _HARMONIC[n]


def _b(subsidies: Any, eid: int) -> Number:
    return ZERO if subsidies is None else subsidies[eid]


def _check_player(state: State, player: int) -> None:
    if not 0 <= player < state.num_players:
        raise InvalidStateError(f"player index {player} out of range")


def player_cost(game: Game, state: State, subsidies: Any, player: int) -> Number:
    """co_i(T; b): sum over the player's path of (w_a - b_a) / n_a(T)."""
    _check_player(state, player)
    graph = state.graph
    total: Number = ZERO
    for eid in state.paths[player]:
        total += (graph.edges[eid].weight - _b(subsidies, eid)) / state.usage[eid]
    return total


def social_cost(state: State, subsidies: Any = None) -> Number:
    """Players' total cost: weight of established edges minus their subsidies."""
    return sum(
        (state.graph.edges[eid].weight - _b(subsidies, eid) for eid in state.usage),
        ZERO,
    )


def rosenthal_potential(state: State, subsidies: Any = None) -> Number:
    """Sum over edges of (w_a - b_a) * H_{n_a(T)}."""
    graph = state.graph
    return sum(
        ((graph.edges[eid].weight - _b(subsidies, eid)) * harmonic(n) for eid, n in state.usage.items()),
        ZERO,
    )


def shortest_path(graph, source: int, target: int, weight) -> Tuple[Tuple[int, ...], Number]:
    """Dijkstra with (distance, edge-id sequence) labels.

    Among shortest paths the lexicographically smallest edge-id sequence wins.
    networkx's Dijkstra keeps whichever tie it reaches first and works on
    node pairs rather than parallel edge ids, hence the local version.
    ``weight`` maps an edge id to a non-negative length.
    """
    settled = [False] * graph.num_nodes
    heap: List[Tuple[Number, Tuple[int, ...], int]] = [(ZERO, (), source)]
    while heap:
        dist, path, node = heapq.heappop(heap)
        if settled[node]:
            continue
        settled[node] = True
        if node == target:
            return path, dist
        for eid in graph.adjacency[node]:
            nxt = graph.edges[eid].other(node)
            if not settled[nxt]:
                heapq.heappush(heap, (dist + weight(eid), path + (eid,), nxt))
    raise InvalidStateError(f"no path from {graph.label(source)} to {graph.label(target)}")


def best_response(game: Game, state: State, subsidies: Any, player: int) -> Tuple[Tuple[int, ...], Number]:
    """Cheapest path for ``player`` with everybody else fixed.

    Edge ``a`` costs (w_a - b_a) / (n_a(T) + 1 - n^i_a(T)) to the deviator.
    """
    _check_player(state, player)
    graph = state.graph
    mine = state.path_sets[player]
    usage = state.usage

    def reduced(eid: int) -> Number:
        share = usage.get(eid, 0) + (0 if eid in mine else 1)
        return (graph.edges[eid].weight - _b(subsidies, eid)) / share

    s, t = state.pairs[player]
    return shortest_path(graph, s, t, reduced)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    player: Optional[int] = None
    label: Optional[str] = None
    path: Tuple[int, ...] = ()
    gain: Optional[Number] = None

    def to_record(self) -> VerdictRecord:
        if self.ok:
            return VerdictRecord(ok=True)
        gain = format_rational(self.gain) if isinstance(self.gain, Fraction) else repr(float(self.gain))
        return VerdictRecord(ok=False, player=self.label, gain=gain, path=list(self.path))

    def to_json(self) -> str:
        return dump(self.to_record())


OK = Verdict(ok=True)


def is_equilibrium_general(game: Game, state: State, subsidies: Any = None, tol: float = 0) -> Verdict:
    """Report the first player (by index) whose best response is strictly cheaper."""
    for i in range(state.num_players):
        path, cost = best_response(game, state, subsidies, i)
        current = player_cost(game, state, subsidies, i)
        if cost < current - tol:
            return Verdict(False, i, game.player_label(i), path, current - cost)
    return OK


@dataclass(frozen=True)
class DeviationConstraint:
    """Player at ``node`` must not prefer edge ``edge`` followed by the tree path of its other end.

    Encoded as ``sum(coefficients[a] * b_a) <= rhs``.
    """

    node: int
    edge: int
    path: Tuple[int, ...]
    coefficients: Dict[int, Fraction]
    rhs: Fraction

    def slack(self, subsidies: Any) -> Number:
        used = sum((c * _b(subsidies, a) for a, c in self.coefficients.items()), ZERO)
        return self.rhs - used


def broadcast_constraints(game: BroadcastGame, tree: SpanningTree) -> List[DeviationConstraint]:
    """One constraint per ordered pair (u, v) joined by a non-tree edge, u not the root."""
    if tree.graph is not game.graph or tree.root != game.root:
        raise NotSpanningTreeError("tree does not belong to this game")
    graph = game.graph
    usage = tree.usage
    out: List[DeviationConstraint] = []
    for edge in tree.non_tree_edges():
        for u, v in ((edge.u, edge.v), (edge.v, edge.u)):
            if u == game.root:
                continue
            up_u = tree.path(u)
            up_v = tree.path(v)
            mine = set(up_u)
            coefficients: Dict[int, Fraction] = {edge.id: Fraction(1)}
            rhs = edge.weight
            for a in up_u:
                share = Fraction(1, usage[a])
                coefficients[a] = coefficients.get(a, ZERO) - share
                rhs -= graph.edges[a].weight * share
            for a in up_v:
                share = Fraction(1, usage[a] + (0 if a in mine else 1))
                coefficients[a] = coefficients.get(a, ZERO) + share
                rhs += graph.edges[a].weight * share
            coefficients = {a: c for a, c in coefficients.items() if c}
            out.append(DeviationConstraint(u, edge.id, (edge.id,) + up_v, coefficients, rhs))
    return out


def is_equilibrium_broadcast(
    game: BroadcastGame,
    tree: SpanningTree,
    subsidies: Any = None,
    tol: float = 0,
    constraints: Optional[Sequence[DeviationConstraint]] = None,
) -> Verdict:
    """Equilibrium test for a spanning tree of a broadcast game.

    A tree is stable exactly when no player gains by leaving through a single
    non-tree edge and following the tree from its other endpoint, so only
    those deviations are examined.
    """
    for con in constraints if constraints is not None else broadcast_constraints(game, tree):
        slack = con.slack(subsidies)
        if slack < -tol:
            return Verdict(False, game.player_index(con.node), game.graph.label(con.node), con.path, -slack)
    return OK


def initial_state(game: Game) -> State:
    """Every player on a minimum-weight path to its destination."""
    graph = game.graph
    paths = [shortest_path(graph, s, t, lambda eid: graph.edges[eid].weight)[0] for s, t in game.pairs]
    return State(graph, game.pairs, paths)


def cost_report(game: Game, state: State, subsidies: Any = None) -> List[Tuple[str, Number]]:
    return [(game.player_label(i), player_cost(game, state, subsidies, i)) for i in range(state.num_players)]


class DynamicsResult(NamedTuple):
    state: State
    potentials: List[Number]
    moves: int
    rounds: int


def best_response_dynamics(
    game: Game,
    state: State,
    subsidies: Any = None,
    order: str = "round_robin",
    seed: Optional[int] = None,
    max_rounds: int = 1000,
) -> DynamicsResult:
    """Let players switch to strictly better best responses until nobody moves.

    Args:
        order: ``"round_robin"`` (player id order) or ``"random"`` (a fresh
            seeded permutation every round).

    Raises:
        DynamicsCapError: when ``max_rounds`` full rounds pass with moves in each.
    """
    if order not in ("round_robin", "random"):
        raise ValueError(f"unknown order policy {order!r}")
    rng = random.Random(seed)
    players = list(range(state.num_players))
    potentials = [rosenthal_potential(state, subsidies)]
    moves = 0
    for rnd in range(1, max_rounds + 1):
        if order == "random":
            rng.shuffle(players)
        moved = False
        for i in players:
            path, cost = best_response(game, state, subsidies, i)
            if cost < player_cost(game, state, subsidies, i):
                state = state.with_path(i, path)
                potentials.append(rosenthal_potential(state, subsidies))
                moves += 1
                moved = True
                logger.debug("round %d: player %s moves, potential %s", rnd, game.player_label(i), potentials[-1])
        if not moved:
            return DynamicsResult(state, potentials, moves, rnd)
    raise DynamicsCapError(f"no equilibrium within {max_rounds} rounds", last_state=state)
