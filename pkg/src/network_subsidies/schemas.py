"""JSON file formats (game, tree, subsidies, reports) and DOT export."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from network_subsidies.errors import GameFormatError
from network_subsidies.model import (
    BroadcastGame,
    Edge,
    Game,
    GeneralGame,
    Graph,
    SpanningTree,
    SubsidyAssignment,
    format_rational,
    parse_rational,
)


class EdgeRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: int
    u: str
    v: str
    w: str


class GameFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: List[str]
    root: Optional[str] = None
    edges: List[EdgeRecord]
    pairs: Optional[List[Tuple[str, str]]] = None

    @model_validator(mode="after")
    def _root_xor_pairs(self) -> "GameFile":
        if (self.root is None) == (self.pairs is None):
            raise ValueError("exactly one of 'root' and 'pairs' must be given")
        return self


class TreeFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    edges: List[int]


class SubsidyFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    integral: bool = False
    b: Dict[str, str]


class VerdictRecord(BaseModel):
    ok: bool
    player: Optional[str] = None
    gain: Optional[str] = None
    path: Optional[List[int]] = None


class PosReport(BaseModel):
    pos: str
    best_eq_weight: str
    mst_weight: str


Source = Union[str, bytes]


def _validate(model: type, data: Source) -> BaseModel:
    try:
        return model.model_validate_json(data)
    except ValidationError as exc:
        raise GameFormatError(f"invalid {model.__name__}: {exc.errors()[0]['msg']}") from exc
    except (ValueError, UnicodeDecodeError) as exc:
        raise GameFormatError(str(exc)) from exc


def dump(record: BaseModel) -> str:
    return record.model_dump_json(exclude_none=True)


def load_game(data: Source) -> Game:
    """Parse and validate a game file.

    Raises:
        GameFormatError: malformed JSON, unknown nodes, negative weights, self-loops.
        DisconnectedGraphError: the graph is not connected.
    """
    record: GameFile = _validate(GameFile, data)
    index = {label: i for i, label in enumerate(record.nodes)}
    if len(index) != len(record.nodes):
        raise GameFormatError("duplicate node label")
    ordered = sorted(record.edges, key=lambda e: e.id)
    if [e.id for e in ordered] != list(range(len(ordered))):
        raise GameFormatError("edge ids must be 0..m-1 without gaps")
    edges = []
    for rec in ordered:
        if rec.u not in index or rec.v not in index:
            raise GameFormatError(f"edge {rec.id} references an unknown node")
        w = parse_rational(rec.w)
        if w < 0:
            raise GameFormatError("negative weight")
        if rec.u == rec.v:
            raise GameFormatError("self-loop")
        edges.append(Edge(rec.id, index[rec.u], index[rec.v], w))
    graph = Graph(record.nodes, edges)
    graph.require_connected()
    if record.root is not None:
        if record.root not in index:
            raise GameFormatError(f"unknown root {record.root!r}")
        return BroadcastGame(graph, index[record.root])
    pairs = []
    for s, t in record.pairs or []:
        if s not in index or t not in index:
            raise GameFormatError(f"pair ({s}, {t}) references an unknown node")
        if s == t:
            raise GameFormatError(f"pair ({s}, {t}) has identical endpoints")
        pairs.append((index[s], index[t]))
    return GeneralGame(graph, tuple(pairs))


def game_record(game: Game) -> GameFile:
    graph = game.graph
    edges = [
        EdgeRecord(id=e.id, u=graph.label(e.u), v=graph.label(e.v), w=format_rational(e.weight))
        for e in graph.edges
    ]
    if isinstance(game, BroadcastGame):
        return GameFile(nodes=list(graph.labels), root=graph.label(game.root), edges=edges)
    pairs = [(graph.label(s), graph.label(t)) for s, t in game.pairs]
    return GameFile(nodes=list(graph.labels), edges=edges, pairs=pairs)


def save_game(game: Game) -> str:
    return dump(game_record(game))


def load_tree_ids(data: Source) -> List[int]:
    return list(_validate(TreeFile, data).edges)


def load_tree(data: Source, game: BroadcastGame) -> SpanningTree:
    return SpanningTree(game.graph, load_tree_ids(data), game.root)


def save_tree(edge_ids) -> str:
    ids = edge_ids.edge_ids if isinstance(edge_ids, SpanningTree) else edge_ids
    return dump(TreeFile(edges=sorted(ids)))


def load_subsidies(data: Source, graph: Graph) -> SubsidyAssignment:
    record: SubsidyFile = _validate(SubsidyFile, data)
    values: Dict[int, Fraction] = {}
    for key, text in record.b.items():
        try:
            eid = int(key)
        except ValueError:
            raise GameFormatError(f"subsidy key {key!r} is not an edge id") from None
        values[eid] = parse_rational(text)
    return SubsidyAssignment(graph, values, integral=record.integral)


def save_subsidies(subsidies: SubsidyAssignment) -> str:
    b = {str(eid): format_rational(value) for eid, value in subsidies.items()}
    return dump(SubsidyFile(integral=subsidies.integral, b=b))


def _quote(text: str) -> str:
    return json.dumps(text)


def to_dot(graph: Graph, tree: Optional[SpanningTree] = None, subsidies: Optional[SubsidyAssignment] = None) -> str:
    """Graphviz text: tree edges bold, edge labels ``w`` or ``w | b``."""
    tree_ids = tree.edge_ids if tree is not None else frozenset()
    lines = ["graph G {"]
    for label in graph.labels:
        lines.append(f"  {_quote(label)};")
    for e in graph.edges:
        text = format_rational(e.weight)
        b = subsidies[e.id] if subsidies is not None else 0
        if b:
            text += f" | {format_rational(b)}"
        attrs = [f"label={_quote(text)}"]
        if e.id in tree_ids:
            attrs.append("style=bold")
        lines.append(f"  {_quote(graph.label(e.u))} -- {_quote(graph.label(e.v))} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
