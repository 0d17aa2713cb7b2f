"""
Module: model
Graphs, games, strategy profiles and subsidy assignments.

All weights, costs and subsidies are exact ``fractions.Fraction`` values.
Objects are immutable after construction; every helper is a pure function.
Nodes are dense integer ids; the string labels of the input file are kept on
the graph for reporting.
"""
from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import networkx as nx

from network_subsidies.errors import (
    DisconnectedGraphError,
    GameFormatError,
    InvalidStateError,
    InvalidSubsidyError,
    NotSpanningTreeError,
    UnknownEdgeError,
)

Rational = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into an exact fraction.

    Raises:
        GameFormatError: if the text is not an integer or fraction literal.
    """
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise GameFormatError(f"not a rational literal: {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError as exc:
        raise GameFormatError(f"zero denominator in {text!r}") from exc


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def format_decimal(value: Union[Fraction, float], digits: int = 12) -> str:
    """Decimal rendering with ``digits`` significant digits."""
    return f"{float(value):.{digits}g}"


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    u: int
    v: int
    weight: Fraction

    def other(self, node: int) -> int:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise ValueError(f"node {node} is not an endpoint of edge {self.id}")


class Graph:
    """Undirected weighted multigraph with dense node and edge ids.

    Parallel edges are allowed; self-loops and negative weights are not.
    """

    __slots__ = ("labels", "index", "edges", "adjacency")

    def __init__(self, labels: Sequence[str], edges: Sequence[Edge]) -> None:
        self.labels: Tuple[str, ...] = tuple(labels)
        self.index: Dict[str, int] = {}
        for i, label in enumerate(self.labels):
            if label in self.index:
                raise GameFormatError(f"duplicate node label {label!r}")
            self.index[label] = i
        adjacency: List[List[int]] = [[] for _ in self.labels]
        for position, edge in enumerate(edges):
            if edge.id != position:
                raise GameFormatError(f"edge ids must be dense and ordered, found {edge.id} at {position}")
            if not (0 <= edge.u < len(self.labels) and 0 <= edge.v < len(self.labels)):
                raise GameFormatError(f"edge {edge.id} has an unknown endpoint")
            if edge.u == edge.v:
                raise GameFormatError(f"self-loop on edge {edge.id}")
            if edge.weight < 0:
                raise GameFormatError(f"negative weight on edge {edge.id}")
            adjacency[edge.u].append(edge.id)
            adjacency[edge.v].append(edge.id)
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.adjacency: Tuple[Tuple[int, ...], ...] = tuple(tuple(a) for a in adjacency)

    @classmethod
    def build(cls, labels: Sequence[str], triples: Iterable[Tuple[str, str, Fraction]]) -> "Graph":
        """Create a graph from labelled endpoints; edge ids follow the triple order."""
        index = {label: i for i, label in enumerate(labels)}
        edges = []
        for eid, (a, b, w) in enumerate(triples):
            if a not in index or b not in index:
                raise GameFormatError(f"edge {eid} references an unknown node")
            edges.append(Edge(eid, index[a], index[b], Fraction(w)))
        return cls(labels, edges)

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def node(self, label: str) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise GameFormatError(f"unknown node {label!r}") from None

    def label(self, node: int) -> str:
        return self.labels[node]

    def edge(self, eid: int) -> Edge:
        if not isinstance(eid, int) or not 0 <= eid < len(self.edges):
            raise UnknownEdgeError(f"unknown edge id {eid!r}")
        return self.edges[eid]

    def weight(self, eid: int) -> Fraction:
        return self.edge(eid).weight

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_nodes))
        g.add_edges_from((e.u, e.v) for e in self.edges)
        return g

    def is_connected(self) -> bool:
        if self.num_nodes <= 1:
            return True
        return nx.is_connected(self.to_networkx())

    def require_connected(self) -> None:
        if not self.is_connected():
            raise DisconnectedGraphError("graph is not connected")


def wgt(graph: Graph, edge_ids: Iterable[int]) -> Fraction:
    """Exact total weight of an edge-id set."""
    total = ZERO
    for eid in set(edge_ids):
        total += graph.edge(eid).weight
    return total


@dataclass(frozen=True)
class BroadcastGame:
    """Every non-root node hosts one player whose destination is the root."""

    graph: Graph
    root: int

    @cached_property
    def players(self) -> Tuple[int, ...]:
        return tuple(v for v in range(self.graph.num_nodes) if v != self.root)

    @cached_property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((v, self.root) for v in self.players)

    @property
    def num_players(self) -> int:
        return self.graph.num_nodes - 1

    def player_node(self, player: int) -> int:
        return player if player < self.root else player + 1

    def player_label(self, player: int) -> str:
        return self.graph.label(self.player_node(player))

    def player_index(self, node: int) -> int:
        return node if node < self.root else node - 1


@dataclass(frozen=True)
class GeneralGame:
    """Player i connects ``pairs[i][0]`` to ``pairs[i][1]``."""

    graph: Graph
    pairs: Tuple[Tuple[int, int], ...]

    @property
    def num_players(self) -> int:
        return len(self.pairs)

    def player_label(self, player: int) -> str:
        return self.graph.label(self.pairs[player][0])


Game = Union[BroadcastGame, GeneralGame]


class SpanningTree:
    """A spanning tree rooted at ``root``.

    ``usage[a]`` is n_a(T): the number of nodes below tree edge ``a``, which
    for a broadcast game is the number of players using ``a``.
    """

    __slots__ = ("graph", "root", "edge_ids", "parent", "parent_edge", "depth", "order", "usage")

    def __init__(self, graph: Graph, edge_ids: Iterable[int], root: int) -> None:
        ids = frozenset(edge_ids)
        for eid in ids:
            graph.edge(eid)
        n = graph.num_nodes
        if len(ids) != n - 1:
            raise NotSpanningTreeError(f"a spanning tree needs {n - 1} edges, got {len(ids)}")
        parent = [-1] * n
        parent_edge = [-1] * n
        depth = [-1] * n
        depth[root] = 0
        order = [root]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for eid in graph.adjacency[x]:
                if eid not in ids:
                    continue
                y = graph.edges[eid].other(x)
                if depth[y] >= 0:
                    if parent_edge[x] != eid:
                        raise NotSpanningTreeError("edge set contains a cycle")
                    continue
                depth[y] = depth[x] + 1
                parent[y] = x
                parent_edge[y] = eid
                order.append(y)
                queue.append(y)
        if len(order) != n:
            raise NotSpanningTreeError("edge set does not span the graph")
        below = [1] * n
        usage: Dict[int, int] = {}
        for y in reversed(order[1:]):
            below[parent[y]] += below[y]
            usage[parent_edge[y]] = below[y]
        self.graph = graph
        self.root = root
        self.edge_ids: FrozenSet[int] = ids
        self.parent: Tuple[int, ...] = tuple(parent)
        self.parent_edge: Tuple[int, ...] = tuple(parent_edge)
        self.depth: Tuple[int, ...] = tuple(depth)
        self.order: Tuple[int, ...] = tuple(order)
        self.usage: Dict[int, int] = usage

    def __contains__(self, eid: int) -> bool:
        return eid in self.edge_ids

    def path(self, node: int) -> Tuple[int, ...]:
        """T_u: edge ids from ``node`` up to the root."""
        out = []
        while node != self.root:
            out.append(self.parent_edge[node])
            node = self.parent[node]
        return tuple(out)

    def path_between(self, a: int, b: int) -> Tuple[int, ...]:
        up_a: List[int] = []
        up_b: List[int] = []
        while self.depth[a] > self.depth[b]:
            up_a.append(self.parent_edge[a])
            a = self.parent[a]
        while self.depth[b] > self.depth[a]:
            up_b.append(self.parent_edge[b])
            b = self.parent[b]
        while a != b:
            up_a.append(self.parent_edge[a])
            a = self.parent[a]
            up_b.append(self.parent_edge[b])
            b = self.parent[b]
        return tuple(up_a) + tuple(reversed(up_b))

    def children(self) -> List[List[int]]:
        kids: List[List[int]] = [[] for _ in range(self.graph.num_nodes)]
        for y in self.order[1:]:
            kids[self.parent[y]].append(y)
        return kids

    def lower_node(self, eid: int) -> int:
        e = self.graph.edges[eid]
        return e.u if self.parent_edge[e.u] == eid else e.v

    def non_tree_edges(self) -> Iterator[Edge]:
        return (e for e in self.graph.edges if e.id not in self.edge_ids)

    @property
    def weight(self) -> Fraction:
        return wgt(self.graph, self.edge_ids)


def _walk(graph: Graph, source: int, target: int, path: Sequence[int]) -> None:
    node = source
    seen = {node}
    for eid in path:
        edge = graph.edge(eid)
        if node not in (edge.u, edge.v):
            raise InvalidStateError(f"edge {eid} does not continue the path at node {graph.label(node)}")
        node = edge.other(node)
        if node in seen:
            raise InvalidStateError("path is not simple")
        seen.add(node)
    if node != target:
        raise InvalidStateError(f"path from {graph.label(source)} ends at {graph.label(node)}")


class State:
    """A strategy profile: one simple path per player."""

    __slots__ = ("graph", "pairs", "paths", "path_sets", "usage")

    def __init__(self, graph: Graph, pairs: Sequence[Tuple[int, int]], paths: Sequence[Sequence[int]]) -> None:
        if len(paths) != len(pairs):
            raise InvalidStateError(f"{len(pairs)} players but {len(paths)} paths")
        for (s, t), path in zip(pairs, paths):
            _walk(graph, s, t, path)
        self.graph = graph
        self.pairs: Tuple[Tuple[int, int], ...] = tuple(pairs)
        self.paths: Tuple[Tuple[int, ...], ...] = tuple(tuple(p) for p in paths)
        self.path_sets: Tuple[FrozenSet[int], ...] = tuple(frozenset(p) for p in self.paths)
        counts: Counter = Counter()
        for p in self.paths:
            counts.update(p)
        self.usage: Dict[int, int] = dict(counts)

    @classmethod
    def from_tree(cls, game: BroadcastGame, tree: SpanningTree) -> "State":
        return cls(game.graph, game.pairs, [tree.path(v) for v in game.players])

    @classmethod
    def from_edge_set(cls, game: Game, edge_ids: Iterable[int]) -> "State":
        """Route every pair along the unique path of a forest of established edges."""
        ids = frozenset(edge_ids)
        graph = game.graph
        sub = nx.Graph()
        sub.add_nodes_from(range(graph.num_nodes))
        for eid in sorted(ids):
            e = graph.edge(eid)
            if sub.has_edge(e.u, e.v):
                raise InvalidStateError("established edges contain a cycle")
            sub.add_edge(e.u, e.v, id=eid)
        if not nx.is_forest(sub):
            raise InvalidStateError("established edges contain a cycle")
        paths = []
        for s, t in game.pairs:
            try:
                nodes = nx.shortest_path(sub, s, t)
            except nx.NetworkXNoPath:
                raise InvalidStateError(f"pair ({graph.label(s)}, {graph.label(t)}) is not connected") from None
            paths.append([sub.edges[a, b]["id"] for a, b in zip(nodes, nodes[1:])])
        return cls(graph, game.pairs, paths)

    @property
    def num_players(self) -> int:
        return len(self.pairs)

    def n(self, eid: int) -> int:
        return self.usage.get(eid, 0)

    def uses(self, player: int, eid: int) -> bool:
        return eid in self.path_sets[player]

    def established(self) -> FrozenSet[int]:
        return frozenset(self.usage)

    def with_path(self, player: int, path: Sequence[int]) -> "State":
        paths = list(self.paths)
        paths[player] = tuple(path)
        return State(self.graph, self.pairs, paths)


class SubsidyAssignment:
    """Per-edge subsidies b_a with 0 <= b_a <= w_a.

    Indexing returns 0 for edges that carry no subsidy. With ``integral`` set
    every value must be 0 or the full edge weight.
    """

    __slots__ = ("graph", "integral", "_values")

    def __init__(self, graph: Graph, values: Optional[Mapping[int, Fraction]] = None, integral: bool = False) -> None:
        clean: Dict[int, Fraction] = {}
        for eid, raw in (values or {}).items():
            w = graph.edge(eid).weight
            b = Fraction(raw)
            if b < 0 or b > w:
                raise InvalidSubsidyError(f"subsidy {b} on edge {eid} is outside [0, {w}]")
            if integral and b not in (ZERO, w):
                raise InvalidSubsidyError(f"all-or-nothing subsidy on edge {eid} must be 0 or {w}")
            if b:
                clean[eid] = b
        self.graph = graph
        self.integral = integral
        self._values = clean

    @classmethod
    def full(cls, graph: Graph, edge_ids: Iterable[int], integral: bool = True) -> "SubsidyAssignment":
        return cls(graph, {eid: graph.edge(eid).weight for eid in edge_ids}, integral=integral)

    def __getitem__(self, eid: int) -> Fraction:
        return self._values.get(eid, ZERO)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsidyAssignment):
            return NotImplemented
        return self._values == other._values and self.integral == other.integral

    def __repr__(self) -> str:
        return f"SubsidyAssignment({self._values!r}, integral={self.integral})"

    def items(self) -> List[Tuple[int, Fraction]]:
        return sorted(self._values.items())

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(self._values)

    @property
    def total(self) -> Fraction:
        return sum(self._values.values(), ZERO)


class UnionFind:
    """Disjoint sets with optional undo (union by size, no path compression).

    networkx's UnionFind compresses paths, so it cannot roll back a union;
    the spanning tree enumeration needs that rollback.
    """

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n
        self._history: List[Tuple[int, int]] = []
        self.components = n

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self._history.append((ra, rb))
        self.components -= 1
        return True

    def undo(self) -> None:
        ra, rb = self._history.pop()
        self.parent[rb] = rb
        self.size[ra] -= self.size[rb]
        self.components += 1


def minimum_spanning_tree(graph: Graph, root: int) -> SpanningTree:
    """Kruskal's algorithm; equal weights are taken in ascending edge id order.

    networkx breaks ties by its own edge iteration order, not by edge id, so
    the tree it returns for tied weights would not be reproducible here.

    Raises:
        DisconnectedGraphError: if the graph is not connected.
    """
    uf = UnionFind(graph.num_nodes)
    chosen = []
    for edge in sorted(graph.edges, key=lambda e: (e.weight, e.id)):
        if uf.union(edge.u, edge.v):
            chosen.append(edge.id)
            if len(chosen) == graph.num_nodes - 1:
                break
    if uf.components != 1:
        raise DisconnectedGraphError("graph is not connected")
    return SpanningTree(graph, chosen, root)


def is_mst(graph: Graph, tree: SpanningTree, weight: Optional[Callable[[int], Fraction]] = None) -> bool:
    """Cycle-exchange test: every non-tree edge weighs at least the heaviest tree edge it would replace.

    Args:
        weight: optional edge-id -> weight function, used to test the tree
            against re-weighted copies of the graph.

    Raises:
        NotSpanningTreeError: if ``tree`` belongs to a different graph.
    """
    if tree.graph is not graph:
        raise NotSpanningTreeError("tree does not span this graph")
    w = weight or (lambda eid: graph.edges[eid].weight)
    for edge in tree.non_tree_edges():
        heaviest = max((w(a) for a in tree.path_between(edge.u, edge.v)), default=ZERO)
        if w(edge.id) < heaviest:
            return False
    return True
