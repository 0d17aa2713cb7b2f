import random
from fractions import Fraction

import pytest

import network_subsidies.oracles as orc
from network_subsidies.errors import CapExceededError, DisconnectedGraphError, UsageError
from network_subsidies.game import is_equilibrium_broadcast
from network_subsidies.generators.families import gen_cycle, gen_indepset
from network_subsidies.model import BroadcastGame, Edge, Graph, SpanningTree
from network_subsidies.sne import min_subsidy
from random_games import cycle_graph, random_broadcast, random_graph

K4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def complete4():
    return Graph([f"n{i}" for i in range(4)], [Edge(k, u, v, Fraction(1)) for k, (u, v) in enumerate(K4)])


def kirchhoff(graph):
    sympy = pytest.importorskip("sympy")
    n = graph.num_nodes
    lap = sympy.zeros(n, n)
    for e in graph.edges:
        lap[e.u, e.u] += 1
        lap[e.v, e.v] += 1
        lap[e.u, e.v] -= 1
        lap[e.v, e.u] -= 1
    return int(lap[1:, 1:].det())


def test_enumeration_counts():
    assert len(list(orc.iter_spanning_edge_sets(complete4()))) == 16
    assert len(list(orc.iter_spanning_edge_sets(cycle_graph(5)))) == 5
    parallel = Graph(["a", "b"], [Edge(k, 0, 1, Fraction(k)) for k in range(3)])
    assert list(orc.iter_spanning_edge_sets(parallel)) == [(0,), (1,), (2,)]


def test_enumeration_matches_matrix_tree_theorem():
    rng = random.Random(12)
    for _ in range(50):
        graph = random_graph(rng, rng.randint(2, 8), rng.randint(0, 6))
        found = list(orc.iter_spanning_edge_sets(graph))
        assert len(found) == len(set(found)) == kirchhoff(graph)
        for ids in found:
            SpanningTree(graph, ids, 0)


def test_enumeration_cap_and_disconnected():
    with pytest.raises(CapExceededError) as info:
        list(orc.iter_spanning_edge_sets(complete4(), cap=10))
    assert info.value.count == 11
    broken = Graph(["a", "b", "c"], [Edge(0, 0, 1, Fraction(1))])
    with pytest.raises(DisconnectedGraphError):
        list(orc.iter_spanning_edge_sets(broken))


def test_pos_on_unit_four_cycle():
    game = BroadcastGame(cycle_graph(4), 0)
    report = orc.pos_report(game)
    assert report.model_dump() == {"pos": "1", "best_eq_weight": "3", "mst_weight": "3"}
    assert orc.price_of_stability(game) == 1


def test_pos_on_zero_weight_graph():
    game = BroadcastGame(cycle_graph(3, Fraction(0)), 0)
    assert orc.pos_report_values(game) == (1, 0, 0)


def test_best_equilibrium_is_lightest_stable_tree():
    rng = random.Random(6)
    for _ in range(20):
        game = random_broadcast(rng, max_nodes=6, max_extra=4)
        best = orc.best_equilibrium(game)
        assert best is not None
        assert is_equilibrium_broadcast(game, best.tree).ok
        for tree in orc.enumerate_spanning_trees(game.graph, game.root):
            if tree.weight < best.weight:
                assert not is_equilibrium_broadcast(game, tree).ok
        assert orc.best_equilibrium(game, jobs=3).weight == best.weight


def test_grid_search_on_three_cycle():
    game, tree = gen_cycle(3)
    assert orc.grid_min_subsidy(game, tree) == Fraction(5, 6)
    assert orc.grid_min_subsidy(game, tree, denominator=1) == 1


def test_grid_search_limits():
    game, tree = gen_cycle(5)
    with pytest.raises(UsageError):
        orc.grid_min_subsidy(game, tree)
    small, small_tree = gen_cycle(3)
    with pytest.raises(UsageError):
        orc.grid_min_subsidy(small, small_tree, denominator=13)
    with pytest.raises(CapExceededError):
        orc.grid_min_subsidy(small, small_tree, cap=100)


def test_stable_network_design_on_three_cycle():
    game, _ = gen_cycle(3)
    design = orc.stable_network_design(game, Fraction(0), Fraction(3))
    assert design.cost == 0
    assert is_equilibrium_broadcast(game, design.tree).ok
    assert orc.stable_network_design(game, Fraction(-1), Fraction(3)) is None
    assert orc.stable_network_design(game, Fraction(5), Fraction(2)) is None
    assert orc.min_subsidy_for_weight(game, Fraction(3)) == 0
    assert orc.min_subsidy_for_weight(game, Fraction(2)) is None


def test_design_cost_matches_lp():
    rng = random.Random(10)
    for _ in range(10):
        game = random_broadcast(rng, max_nodes=5, max_extra=3)
        bound = sum((e.weight for e in game.graph.edges), Fraction(0))
        design = orc.stable_network_design(game, bound, bound)
        assert design is not None
        assert design.cost == min_subsidy(game, design.tree).cost
        assert design.cost == orc.min_subsidy_for_weight(game, bound)


@pytest.mark.slow
def test_best_equilibrium_of_k4_reduction():
    inst = gen_indepset(K4, Fraction(1, 12))
    best = orc.best_equilibrium(inst.game, cap=1_000_000, jobs=4)
    assert best.weight == Fraction(109, 12)
