"""Seeded random instances shared by the tests."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, List, Tuple

from network_subsidies.game import shortest_path
from network_subsidies.model import BroadcastGame, Edge, GeneralGame, Graph, SpanningTree, SubsidyAssignment, UnionFind

WeightFn = Callable[[random.Random], Fraction]


def random_weight(rng: random.Random, max_den: int = 12) -> Fraction:
    return Fraction(rng.randint(0, 3 * max_den), rng.randint(1, max_den))


def random_unit_weight(rng: random.Random, max_den: int = 12) -> Fraction:
    """A weight in [0, 1] with denominator at most ``max_den``; keeps 1/12 grids small."""
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_graph(rng: random.Random, n: int, extra: int, weight: WeightFn = random_weight) -> Graph:
    """Connected multigraph: a random tree plus ``extra`` random non-loop edges."""
    labels = [f"n{i}" for i in range(n)]
    pairs: List[Tuple[int, int]] = []
    for v in range(1, n):
        pairs.append((rng.randrange(v), v))
    for _ in range(extra):
        u, v = rng.sample(range(n), 2)
        pairs.append((u, v))
    rng.shuffle(pairs)
    edges = [Edge(k, u, v, weight(rng)) for k, (u, v) in enumerate(pairs)]
    return Graph(labels, edges)


def random_broadcast(
    rng: random.Random, max_nodes: int = 8, max_extra: int = 5, weight: WeightFn = random_weight
) -> BroadcastGame:
    n = rng.randint(2, max_nodes)
    graph = random_graph(rng, n, rng.randint(0, max_extra), weight)
    return BroadcastGame(graph, rng.randrange(n))


def random_general(rng: random.Random, max_nodes: int = 6, players: int = 3) -> GeneralGame:
    n = rng.randint(3, max_nodes)
    graph = random_graph(rng, n, rng.randint(1, 4))
    pairs = tuple(tuple(rng.sample(range(n), 2)) for _ in range(players))
    return GeneralGame(graph, pairs)


def random_spanning_tree(rng: random.Random, graph: Graph, root: int = 0) -> SpanningTree:
    """Kruskal over a shuffled edge order."""
    order = list(range(graph.num_edges))
    rng.shuffle(order)
    uf = UnionFind(graph.num_nodes)
    chosen = [eid for eid in order if uf.union(graph.edges[eid].u, graph.edges[eid].v)]
    return SpanningTree(graph, chosen, root)


def random_tree(rng: random.Random, game: BroadcastGame) -> SpanningTree:
    return random_spanning_tree(rng, game.graph, game.root)


def random_subsidies(rng: random.Random, graph: Graph) -> SubsidyAssignment:
    values = {}
    for e in graph.edges:
        if rng.random() < 0.5 and e.weight:
            values[e.id] = e.weight * Fraction(rng.randint(0, 4), 4)
    return SubsidyAssignment(graph, values)


def random_path(rng: random.Random, graph: Graph, source: int, target: int) -> Tuple[int, ...]:
    """A simple source-target path: the shortest path under random positive edge lengths."""
    noise = [Fraction(rng.randint(1, 20)) for _ in graph.edges]
    path, _ = shortest_path(graph, source, target, noise.__getitem__)
    return path


def cycle_graph(n: int, weight: Fraction = Fraction(1)) -> Graph:
    labels = [f"v{i}" for i in range(n)]
    return Graph(labels, [Edge(i, i, (i + 1) % n, weight) for i in range(n)])
