import random
from fractions import Fraction

import pytest

import network_subsidies.model as md
from network_subsidies.errors import (
    DisconnectedGraphError,
    GameFormatError,
    InvalidStateError,
    InvalidSubsidyError,
    NotSpanningTreeError,
    UnknownEdgeError,
)
from random_games import cycle_graph, random_broadcast, random_spanning_tree, random_tree


def star_with_chord():
    # r - a - b path plus chord r - b
    return md.Graph.build(["r", "a", "b"], [("r", "a", 1), ("a", "b", 1), ("r", "b", Fraction(3, 2))])


def test_parse_and_format_rational():
    assert md.parse_rational("3/6") == Fraction(1, 2)
    assert md.parse_rational(" 7 ") == 7
    assert md.format_rational(Fraction(10, 4)) == "5/2"
    assert md.format_decimal(Fraction(1, 3), 4) == "0.3333"
    for bad in ("1.5", "a/b", "1/0", ""):
        with pytest.raises(GameFormatError):
            md.parse_rational(bad)


def test_graph_rejects_bad_edges():
    with pytest.raises(GameFormatError):
        md.Graph(["a", "b"], [md.Edge(0, 0, 0, Fraction(1))])
    with pytest.raises(GameFormatError):
        md.Graph(["a", "b"], [md.Edge(0, 0, 1, Fraction(-1))])
    with pytest.raises(GameFormatError):
        md.Graph(["a", "a"], [])
    with pytest.raises(GameFormatError):
        md.Graph(["a", "b"], [md.Edge(1, 0, 1, Fraction(1))])


def test_graph_lookup_and_weight():
    g = star_with_chord()
    assert g.num_nodes == 3 and g.num_edges == 3
    assert g.node("b") == 2 and g.label(1) == "a"
    assert md.wgt(g, [0, 1, 1]) == 2
    with pytest.raises(UnknownEdgeError):
        g.edge(7)
    with pytest.raises(GameFormatError):
        g.node("zzz")


def test_disconnected_graph():
    g = md.Graph(["a", "b", "c"], [md.Edge(0, 0, 1, Fraction(1))])
    assert not g.is_connected()
    with pytest.raises(DisconnectedGraphError):
        g.require_connected()
    with pytest.raises(DisconnectedGraphError):
        md.minimum_spanning_tree(g, 0)


def test_spanning_tree_usage_and_paths():
    g = star_with_chord()
    tree = md.SpanningTree(g, [0, 1], 0)
    assert tree.usage == {0: 2, 1: 1}
    assert tree.path(2) == (1, 0)
    assert tree.path_between(1, 2) == (1,)
    assert tree.weight == 2
    assert [e.id for e in tree.non_tree_edges()] == [2]
    assert tree.children()[0] == [1]
    assert tree.lower_node(1) == 2


def test_spanning_tree_rejects_non_trees():
    g = cycle_graph(4)
    with pytest.raises(NotSpanningTreeError):
        md.SpanningTree(g, [0, 1], 0)
    with pytest.raises(NotSpanningTreeError):
        md.SpanningTree(g, [0, 1, 2, 3], 0)
    with pytest.raises(UnknownEdgeError):
        md.SpanningTree(g, [0, 1, 9], 0)


def test_minimum_spanning_tree_breaks_ties_by_id():
    tree = md.minimum_spanning_tree(cycle_graph(4), 0)
    assert tree.edge_ids == frozenset({0, 1, 2})
    assert md.is_mst(tree.graph, tree)


def test_is_mst_detects_heavier_tree():
    g = star_with_chord()
    assert md.is_mst(g, md.SpanningTree(g, [0, 1], 0))
    assert not md.is_mst(g, md.SpanningTree(g, [0, 2], 0))


def test_broadcast_game_player_indexing():
    game = md.BroadcastGame(star_with_chord(), 1)
    assert game.players == (0, 2)
    assert game.pairs == ((0, 1), (2, 1))
    assert game.player_index(2) == 1
    assert game.player_label(1) == "b"


def test_state_from_edge_set_routes_pairs():
    g = cycle_graph(4)
    game = md.GeneralGame(g, ((0, 2), (1, 3)))
    state = md.State.from_edge_set(game, [0, 1, 2])
    assert state.paths == ((0, 1), (1, 2))
    assert state.n(1) == 2 and state.n(3) == 0
    assert state.established() == frozenset({0, 1, 2})
    with pytest.raises(InvalidStateError):
        md.State.from_edge_set(game, [0, 1, 2, 3])
    with pytest.raises(InvalidStateError):
        md.State.from_edge_set(game, [0])


def test_state_rejects_broken_path():
    g = cycle_graph(4)
    with pytest.raises(InvalidStateError):
        md.State(g, [(0, 2)], [[0, 2]])


def test_subsidy_assignment_bounds():
    g = star_with_chord()
    b = md.SubsidyAssignment(g, {0: Fraction(1, 2), 1: 0})
    assert b[0] == Fraction(1, 2) and b[1] == 0 and b[2] == 0
    assert b.support == frozenset({0})
    assert b.total == Fraction(1, 2)
    with pytest.raises(InvalidSubsidyError):
        md.SubsidyAssignment(g, {0: 2})
    with pytest.raises(InvalidSubsidyError):
        md.SubsidyAssignment(g, {0: Fraction(1, 2)}, integral=True)
    full = md.SubsidyAssignment.full(g, [0, 2])
    assert full.integral and full.total == Fraction(5, 2)


def test_union_find_undo():
    uf = md.UnionFind(3)
    assert uf.union(0, 1)
    assert not uf.union(1, 0)
    assert uf.components == 2
    uf.undo()
    assert uf.components == 3
    assert uf.find(1) == 1


def test_state_usage_matches_subtree_sizes():
    rng = random.Random(21)
    for _ in range(100):
        game = random_broadcast(rng, max_nodes=10)
        tree = random_tree(rng, game)
        state = md.State.from_tree(game, tree)
        assert state.usage == tree.usage
        root_edges = [e for e in tree.edge_ids if game.root in (game.graph.edge(e).u, game.graph.edge(e).v)]
        assert sum(tree.usage[e] for e in root_edges) == game.num_players


def test_minimum_spanning_tree_is_lightest():
    rng = random.Random(23)
    for _ in range(30):
        game = random_broadcast(rng, max_nodes=9, max_extra=6)
        mst = md.minimum_spanning_tree(game.graph, game.root)
        assert md.is_mst(game.graph, mst)
        for _ in range(100):
            other = random_spanning_tree(rng, game.graph, game.root)
            assert mst.weight <= other.weight
