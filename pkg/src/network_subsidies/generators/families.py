"""
Module: generators.families
Instance families with a designated spanning tree: the bypass gadget, the
bin packing and independent set reductions, the unit cycle and the
all-or-nothing path.

Every generator builds the graph with exact rational weights; edge ids follow
the order in which edges are added and are documented per family.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, NamedTuple, Sequence, Tuple

import networkx as nx

from network_subsidies.errors import GeneratorError
from network_subsidies.game import harmonic
from network_subsidies.model import ONE, ZERO, BroadcastGame, Graph, SpanningTree

logger = logging.getLogger(__name__)

E_HAT = Fraction(2718281828459045, 10**15)
MAX_DELTA = Fraction(1, 12)


class GraphBuilder:
    """Collects labelled nodes and edges; edge ids are assigned in insertion order."""

    def __init__(self) -> None:
        self.labels: List[str] = []
        self.triples: List[Tuple[str, str, Fraction]] = []
        self._index: Dict[str, int] = {}

    def node(self, label: str) -> int:
        self._index[label] = len(self.labels)
        self.labels.append(label)
        return self._index[label]

    def edge(self, u: str, v: str, weight: Fraction) -> int:
        self.triples.append((u, v, Fraction(weight)))
        return len(self.triples) - 1

    def graph(self) -> Graph:
        return Graph.build(self.labels, self.triples)


def bypass_length(kappa: int) -> int:
    """Smallest l >= 1 with H_{kappa+l} - H_kappa > 1."""
    ell = 1
    while harmonic(kappa + ell) - harmonic(kappa) <= 1:
        ell += 1
    return ell


def bypass_weight(kappa: int) -> Fraction:
    ell = bypass_length(kappa)
    return harmonic(kappa + ell) - harmonic(kappa)


# -- bypass gadget ---------------------------------------------------------


@dataclass(frozen=True)
class BypassLayout:
    kappa: int
    ell: int
    connector: int
    bypass_edge: int


def _add_bypass(builder: GraphBuilder, kappa: int, prefix: str, connector: str) -> Tuple[List[int], int, int]:
    # path edges root outward, then the bypass edge from the connector
    ell = bypass_length(kappa)
    path_labels = [f"{prefix}{i}" for i in range(1, ell)] + [connector]
    for label in path_labels:
        builder.node(label)
    path = []
    previous = "r"
    for label in path_labels:
        path.append(builder.edge(previous, label, ONE))
        previous = label
    bypass = builder.edge(connector, "r", bypass_weight(kappa))
    return path, bypass, ell


def gen_bypass(kappa: int, beta: int = 0) -> Tuple[BroadcastGame, SpanningTree, BypassLayout]:
    """Root, a unit path of length l to connector ``c``, the bypass edge and ``beta`` zero-weight leaves on ``c``.

    Edge ids: path 0..l-1 from the root, bypass l, leaves l+1...
    """
    problems = []
    if kappa < 1:
        problems.append(f"capacity must be at least 1, got {kappa}")
    if beta < 0:
        problems.append(f"leaf count must be non-negative, got {beta}")
    if problems:
        raise GeneratorError(problems)
    b = GraphBuilder()
    b.node("r")
    path, bypass, ell = _add_bypass(b, kappa, "p", "c")
    leaves = []
    for s in range(1, beta + 1):
        b.node(f"s{s}")
        leaves.append(b.edge("c", f"s{s}", ZERO))
    graph = b.graph()
    game = BroadcastGame(graph, graph.node("r"))
    tree = SpanningTree(graph, path + leaves, game.root)
    return game, tree, BypassLayout(kappa, ell, graph.node("c"), bypass)


# -- bin packing -----------------------------------------------------------


@dataclass
class BinPackInstance:
    """Graph of the bin packing reduction.

    Items are stars centred at ``x{i}``; bin ``j`` is a bypass gadget of
    capacity C whose connector ``c{j}`` is joined to every centre.
    """

    game: BroadcastGame
    sizes: Tuple[int, ...]
    bins: int
    capacity: int
    ell: int
    K: Fraction
    fixed_edges: List[int]
    cross: List[List[int]]
    bypass_edges: List[int] = field(default_factory=list)

    def assignments(self) -> Iterator[Tuple[int, ...]]:
        """Every item -> bin map, in lexicographic order."""
        return itertools.product(range(self.bins), repeat=len(self.sizes))

    def loads(self, assignment: Sequence[int]) -> List[int]:
        loads = [0] * self.bins
        for size, j in zip(self.sizes, assignment):
            loads[j] += size
        return loads

    def is_packing(self, assignment: Sequence[int]) -> bool:
        return all(load == self.capacity for load in self.loads(assignment))

    def has_exact_packing(self) -> bool:
        return any(self.is_packing(a) for a in self.assignments())

    def tree_for_assignment(self, assignment: Sequence[int]) -> SpanningTree:
        """The MST joining centre i to connector ``assignment[i]``."""
        if len(assignment) != len(self.sizes):
            raise GeneratorError([f"assignment has {len(assignment)} entries for {len(self.sizes)} items"])
        bad = [j for j in assignment if not 0 <= j < self.bins]
        if bad:
            raise GeneratorError([f"bin index {j} out of range" for j in bad])
        ids = self.fixed_edges + [self.cross[i][j] for i, j in enumerate(assignment)]
        return SpanningTree(self.game.graph, ids, self.game.root)


def gen_binpack(sizes: Sequence[int], bins: int, capacity: int) -> BinPackInstance:
    """Edge ids: per bin its path then bypass, then per item its leaves, then centre-connector edges item-major.

    Raises:
        GeneratorError: listing every violated precondition (even sizes and
            capacity, capacity at least the largest size, sizes summing to bins * capacity).
    """
    sizes = tuple(int(s) for s in sizes)
    problems = []
    if not sizes:
        problems.append("at least one item is required")
    if bins < 1:
        problems.append(f"at least one bin is required, got {bins}")
    for i, s in enumerate(sizes):
        if s <= 0 or s % 2:
            problems.append(f"item {i} size {s} is not a positive even integer")
    if capacity <= 0 or capacity % 2:
        problems.append(f"capacity {capacity} is not a positive even integer")
    if sizes and capacity < max(sizes):
        problems.append(f"capacity {capacity} is below the largest size {max(sizes)}")
    if sum(sizes) != bins * capacity:
        problems.append(f"sizes sum to {sum(sizes)}, expected {bins * capacity}")
    if problems:
        raise GeneratorError(problems)

    b = GraphBuilder()
    b.node("r")
    fixed: List[int] = []
    bypasses: List[int] = []
    ell = 0
    for j in range(bins):
        path, bypass, ell = _add_bypass(b, capacity, f"p{j}.", f"c{j}")
        fixed.extend(path)
        bypasses.append(bypass)
    for i, s in enumerate(sizes):
        b.node(f"x{i}")
        for t in range(1, s):
            b.node(f"x{i}.{t}")
            fixed.append(b.edge(f"x{i}", f"x{i}.{t}", ZERO))
    h = bypass_weight(capacity)
    cross = [[b.edge(f"x{i}", f"c{j}", 2 * h) for j in range(bins)] for i in range(len(sizes))]
    graph = b.graph()
    K = bins * ell + 2 * len(sizes) * h
    logger.debug("bin packing graph: %d nodes, %d edges, K = %s", graph.num_nodes, graph.num_edges, K)
    return BinPackInstance(
        BroadcastGame(graph, graph.node("r")), sizes, bins, capacity, ell, K, fixed, cross, bypasses
    )


# -- independent set in cubic graphs ---------------------------------------


BRANCH_TYPES = ("A", "B", "C", "D", "E")


@dataclass
class IndepSetInstance:
    """Graph over r, one node ``u{a}`` per node of H and one ``e{k}`` per edge of H.

    Edge ids: root edges of the u nodes, root edges of the e nodes, then two
    (2+delta)/3 edges per edge of H.
    """

    game: BroadcastGame
    cubic: nx.Graph
    delta: Fraction
    u_nodes: Dict[int, int]
    e_nodes: List[int]
    root_edge: Dict[int, int]
    incidence: Dict[int, List[int]]

    def tree_for_independent_set(self, independent: Iterable[int]) -> SpanningTree:
        """Type B branches on the nodes of ``independent``, type A branches everywhere else."""
        chosen = sorted(set(independent))
        unknown = [a for a in chosen if a not in self.u_nodes]
        if unknown:
            raise GeneratorError([f"node {a} is not in the cubic graph" for a in unknown])
        if not nx.is_empty(self.cubic.subgraph(chosen)):
            raise GeneratorError(["node set is not independent"])
        ids: List[int] = []
        covered = set()
        for a in chosen:
            ids.append(self.root_edge[self.u_nodes[a]])
            covered.add(self.u_nodes[a])
            for eid in self.incidence[a]:
                ids.append(eid)
                covered.add(self.game.graph.edges[eid].other(self.u_nodes[a]))
        for node in list(self.u_nodes.values()) + self.e_nodes:
            if node not in covered:
                ids.append(self.root_edge[node])
        return SpanningTree(self.game.graph, ids, self.game.root)

    def classify_branches(self, tree: SpanningTree) -> List[Tuple[str, str]]:
        """(top node label, branch type) for every branch of ``tree``, in top-node order."""
        graph = self.game.graph
        kids = tree.children()
        u_set = set(self.u_nodes.values())
        out = []
        for top in sorted(kids[tree.root]):
            depth = 0
            stack = [(top, 1)]
            while stack:
                node, d = stack.pop()
                depth = max(depth, d)
                stack.extend((k, d + 1) for k in kids[node])
            if depth == 1:
                kind = "A"
            elif depth == 2:
                kind = "B" if top in u_set and len(kids[top]) == 3 else "C"
            elif depth == 3:
                kind = "D"
            else:
                kind = "E"
            out.append((graph.label(top), kind))
        return out


def gen_indepset(edges: Iterable[Tuple[int, int]], delta: Fraction = MAX_DELTA) -> IndepSetInstance:
    """Raises GeneratorError when H is not 3-regular or delta is outside (0, 1/12]."""
    cubic = nx.Graph()
    cubic.add_edges_from(edges)
    delta = Fraction(delta)
    problems = []
    if cubic.number_of_nodes() == 0 or not nx.is_regular(cubic) or any(d != 3 for _, d in cubic.degree):
        problems.append("graph is not 3-regular")
    if not ZERO < delta <= MAX_DELTA:
        problems.append(f"delta {delta} is outside (0, 1/12]")
    if problems:
        raise GeneratorError(problems)

    b = GraphBuilder()
    b.node("r")
    hnodes = sorted(cubic.nodes)
    hedges = sorted(tuple(sorted(e)) for e in cubic.edges)
    for a in hnodes:
        b.node(f"u{a}")
    for k in range(len(hedges)):
        b.node(f"e{k}")
    root_edge_by_label = {}
    for a in hnodes:
        root_edge_by_label[f"u{a}"] = b.edge("r", f"u{a}", ONE)
    for k in range(len(hedges)):
        root_edge_by_label[f"e{k}"] = b.edge("r", f"e{k}", ONE)
    incidence: Dict[int, List[int]] = {a: [] for a in hnodes}
    w = (2 + delta) / 3
    for k, (x, y) in enumerate(hedges):
        incidence[x].append(b.edge(f"u{x}", f"e{k}", w))
        incidence[y].append(b.edge(f"u{y}", f"e{k}", w))
    graph = b.graph()
    u_nodes = {a: graph.node(f"u{a}") for a in hnodes}
    e_nodes = [graph.node(f"e{k}") for k in range(len(hedges))]
    root_edge = {graph.node(label): eid for label, eid in root_edge_by_label.items()}
    return IndepSetInstance(BroadcastGame(graph, graph.node("r")), cubic, delta, u_nodes, e_nodes, root_edge, incidence)


def indepset_equilibrium_weight(n: int, m: int, delta: Fraction) -> Fraction:
    """5n/2 - (1 - delta) m."""
    return Fraction(5 * n, 2) - (1 - Fraction(delta)) * m


# -- unit cycle ------------------------------------------------------------


def _path_labels(n: int) -> List[str]:
    return ["r"] + [f"v{i}" for i in range(1, n + 1)]


def gen_cycle(n: int) -> Tuple[BroadcastGame, SpanningTree]:
    """Unit cycle r, v1..vn, r. Edge ids: 0 = (r, v1), i = (v_i, v_i+1), n = (v_n, r); tree 0..n-1."""
    if n < 2:
        raise GeneratorError([f"cycle needs n >= 2, got {n}"])
    labels = _path_labels(n)
    triples = [(labels[i], labels[i + 1], ONE) for i in range(n)] + [(labels[n], "r", ONE)]
    graph = Graph.build(labels, triples)
    game = BroadcastGame(graph, 0)
    return game, SpanningTree(graph, range(n), 0)


def cycle_packing_cost(n: int) -> Fraction:
    """Minimum fractional subsidy of the unit cycle: k (H_n - H_k) for the smallest k with H_n - H_k <= 1."""
    k = 0
    while harmonic(n) - harmonic(k) > 1:
        k += 1
    return k * (harmonic(n) - harmonic(k))


# -- all-or-nothing path ---------------------------------------------------


def aon_x(n: int, e_hat: Fraction = E_HAT) -> Fraction:
    return 1 / (n - n / Fraction(e_hat) + 1)


def gen_aon_path(n: int, e_hat: Fraction = E_HAT) -> Tuple[BroadcastGame, SpanningTree]:
    """Path r, v1..vn of x-edges except (v_n-1, v_n) = 1, plus (r, v_n-1) = x and (r, v_n) = 1.

    Edge ids: path 0..n-1 from the root, then n = (r, v_n-1), n+1 = (r, v_n).
    """
    if n < 3:
        raise GeneratorError([f"path needs n >= 3, got {n}"])
    x = aon_x(n, e_hat)
    labels = _path_labels(n)
    triples = [(labels[i], labels[i + 1], x) for i in range(n - 1)]
    triples.append((labels[n - 1], labels[n], ONE))
    triples.append(("r", labels[n - 1], x))
    triples.append(("r", labels[n], ONE))
    graph = Graph.build(labels, triples)
    game = BroadcastGame(graph, 0)
    return game, SpanningTree(graph, range(n), 0)


class AonBound(NamedTuple):
    all_light: Fraction
    with_unit: Fraction
    tree_weight: Fraction


def aon_path_bound(n: int, e_hat: Fraction = E_HAT) -> AonBound:
    """The two candidate all-or-nothing costs (n-1)x and 1 + (n/e - 2)x, and wgt(T) = 1 + (n-1)x."""
    x = aon_x(n, e_hat)
    return AonBound((n - 1) * x, 1 + (n / Fraction(e_hat) - 2) * x, 1 + (n - 1) * x)
