import random
from fractions import Fraction

import pytest

import network_subsidies.sne as sne
from network_subsidies.errors import IterationCapError, MethodMismatchError
from network_subsidies.game import broadcast_constraints, initial_state, is_equilibrium_broadcast, is_equilibrium_general
from network_subsidies.generators.families import gen_cycle
from network_subsidies.model import BroadcastGame, GeneralGame, Graph, SpanningTree, State
from network_subsidies.oracles import grid_min_subsidy
from random_games import random_broadcast, random_general, random_tree, random_unit_weight


@pytest.mark.parametrize("method", ["lp3", "lp2", "rowgen"])
def test_three_cycle_needs_five_sixths(method):
    game, tree = gen_cycle(3)
    result = sne.min_subsidy(game, tree, method)
    assert result.cost == Fraction(5, 6)
    assert result.subsidies.total == Fraction(5, 6)
    assert is_equilibrium_broadcast(game, tree, result.subsidies).ok


def test_stable_tree_needs_nothing():
    graph = Graph.build(["r", "a", "b"], [("r", "a", 1), ("a", "b", 1), ("r", "b", 2)])
    game = BroadcastGame(graph, 0)
    tree = SpanningTree(graph, [0, 1], 0)
    assert sne.min_subsidy(game, tree).cost == 0


def test_broadcast_lp_has_one_row_per_deviation():
    game, tree = gen_cycle(4)
    program = sne.build_lp_broadcast(game, tree)
    assert program.edges == sorted(tree.edge_ids)
    assert len(program.lp.rows) == len(broadcast_constraints(game, tree))
    assert program.lp.upper == [Fraction(1)] * 4


def test_methods_agree_on_random_broadcast_games():
    rng = random.Random(5)
    for _ in range(50):
        game = random_broadcast(rng, max_nodes=5, max_extra=3, weight=random_unit_weight)
        tree = random_tree(rng, game)
        lp3 = sne.min_subsidy(game, tree, "lp3").cost
        lp2 = sne.min_subsidy(game, tree, "lp2").cost
        rowgen = sne.min_subsidy(game, tree, "rowgen").cost
        assert lp3 == lp2 == rowgen
        assert lp3 <= grid_min_subsidy(game, tree, denominator=12)


def test_methods_agree_on_general_games():
    rng = random.Random(9)
    for _ in range(15):
        game = random_general(rng, max_nodes=5, players=2)
        state = initial_state(game)
        lp2 = sne.min_subsidy(game, state, sne.Method.LP2)
        rowgen = sne.min_subsidy(game, state, sne.Method.ROWGEN, jobs=2)
        assert lp2.cost == rowgen.cost
        assert is_equilibrium_general(game, state, lp2.subsidies).ok


def test_lp3_needs_broadcast_tree():
    graph = Graph.build(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)])
    game = GeneralGame(graph, ((0, 2),))
    state = State.from_edge_set(game, [0, 1])
    with pytest.raises(MethodMismatchError):
        sne.min_subsidy(game, state, "lp3")
    broadcast, tree = gen_cycle(3)
    with pytest.raises(MethodMismatchError):
        sne.min_subsidy(broadcast, State.from_tree(broadcast, tree), "lp3")


def test_unknown_method():
    game, tree = gen_cycle(3)
    with pytest.raises(ValueError):
        sne.min_subsidy(game, tree, "simplex")


def test_row_generation_cap_keeps_last_solution():
    game, tree = gen_cycle(3)
    with pytest.raises(IterationCapError) as info:
        sne.solve_sne_rowgen(game, tree, iteration_factor=0.05)
    partial = info.value.partial
    assert partial is not None
    # the first round only sees the bounds
    assert partial.cost == 0
    assert partial.subsidies.total == 0
    assert sne.solve_sne_rowgen(game, tree, iteration_factor=10).cost == Fraction(5, 6)
