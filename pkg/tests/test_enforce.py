import math
import random
from fractions import Fraction

import pytest

import network_subsidies.enforce as ef
from network_subsidies.errors import CapExceededError, InvalidSubsidyError, MethodMismatchError, NotMinimumSpanningTreeError
from network_subsidies.game import is_equilibrium_broadcast
from network_subsidies.generators.families import aon_path_bound, aon_x, gen_aon_path, gen_cycle
from network_subsidies.model import BroadcastGame, GeneralGame, Graph, SpanningTree, minimum_spanning_tree
from network_subsidies.sne import min_subsidy
from random_games import random_broadcast


def star():
    # r joined to a, b, d with weights 1, 2, 3; leaf-to-leaf chords are heavier
    graph = Graph.build(
        ["r", "a", "b", "d"],
        [("r", "a", 1), ("r", "b", 2), ("r", "d", 3), ("a", "b", 4), ("b", "d", 5)],
    )
    game = BroadcastGame(graph, 0)
    return game, SpanningTree(graph, [0, 1, 2], 0)


def single_level(c, ms):
    return ef.Level(1, Fraction(c), Fraction(c), frozenset(range(len(ms))), dict(enumerate(ms)))


def test_decompose_levels():
    game, tree = star()
    levels = ef.decompose(game.graph, tree)
    assert [lv.threshold for lv in levels] == [1, 2, 3, 4, 5]
    assert [lv.increment for lv in levels] == [1] * 5
    assert levels[1].heavy == frozenset({1, 2, 3, 4})
    assert levels[0].m == {0: 1, 1: 1, 2: 1}
    assert levels[2].m == {2: 1}
    assert levels[1].weight(0) == 0 and levels[1].weight(4) == 1


def test_decompose_counts_heavy_players_below():
    graph = Graph.build(["r", "a", "b", "d"], [("r", "a", 1), ("a", "b", 1), ("a", "d", 0), ("b", "d", 2)])
    tree = SpanningTree(graph, [0, 1, 2], 0)
    level = ef.decompose(graph, tree)[0]
    assert level.m == {0: 2, 1: 1}


def test_decompose_rejects_non_mst():
    game, _ = star()
    with pytest.raises(NotMinimumSpanningTreeError):
        ef.decompose(game.graph, SpanningTree(game.graph, [0, 2, 3], 0))


def test_virtual_cost():
    level = single_level(2, [1, 3])
    assert ef.virtual_cost(level, 0, 0.0) == math.inf
    assert ef.virtual_cost(level, 0, 2.0) == 0.0
    assert ef.virtual_cost(level, 1, 0.0) == pytest.approx(2 * math.log(3 / 2))
    assert ef.virtual_cost(level, 7, 1.0) == 0.0
    with pytest.raises(InvalidSubsidyError):
        ef.virtual_cost(level, 1, 2.5)


def test_virtual_cost_bounds_real_share():
    rng = random.Random(2)
    for _ in range(10_000):
        c = rng.uniform(0.1, 10)
        m = rng.randint(1, 50)
        y = rng.uniform(0, c)
        level = single_level(c, [m])
        assert ef.virtual_cost(level, 0, y) >= (c - y) / m - 1e-9


def test_packed_virtual_cost_closed_form():
    rng = random.Random(4)
    for _ in range(10_000):
        c = rng.uniform(0.1, 10)
        top = rng.randint(1, 40)
        count = rng.randint(1, top)
        amount = rng.uniform(1e-3, count * c)
        ms = list(range(top - count + 1, top + 1))
        rng.shuffle(ms)
        level = single_level(c, ms)
        y = ef.least_crowded_packing(level, range(count), amount)
        total = math.fsum(ef.virtual_cost(level, a, y.get(a, 0.0)) for a in range(count))
        assert total == pytest.approx(ef.packed_virtual_cost(c, top, count, amount), abs=1e-9)


def test_least_crowded_packing_order():
    level = single_level(1, [3, 1, 2])
    assert ef.least_crowded_packing(level, [0, 1, 2], 1.5) == {1: 1.0, 2: 0.5}


def test_star_spends_weight_over_e():
    game, tree = star()
    result = ef.enforce_fractional(game, tree)
    assert result.total == pytest.approx(6 / math.e, abs=1e-12)
    for eid, w in ((0, 1), (1, 2), (2, 3)):
        assert result.subsidies[eid] == pytest.approx(w / math.e)
    assert is_equilibrium_broadcast(game, tree, result.subsidies, tol=1e-9).ok


def test_long_cycle_within_lower_bound():
    game, tree = gen_cycle(1000)
    result = ef.enforce_fractional(game, tree)
    assert 1000 / math.e - 3 <= result.total <= 1000 / math.e + 1e-6
    assert is_equilibrium_broadcast(game, tree, result.subsidies, tol=1e-9).ok


def test_random_msts_are_enforced():
    rng = random.Random(8)
    for _ in range(200):
        game = random_broadcast(rng, max_nodes=12, max_extra=8)
        tree = minimum_spanning_tree(game.graph, game.root)
        result = ef.enforce_fractional(game, tree)
        assert is_equilibrium_broadcast(game, tree, result.subsidies, tol=1e-9).ok
        weight = float(tree.weight)
        assert abs(result.total - weight / math.e) <= 1e-6 * max(weight, 1)
        assert all(0 <= v <= game.graph.edges[a].weight for a, v in result.subsidies.items())


def test_level_subsidies_cap_root_path_virtual_cost():
    rng = random.Random(13)
    for _ in range(100):
        game = random_broadcast(rng, max_nodes=10, max_extra=6)
        tree = minimum_spanning_tree(game.graph, game.root)
        for level in ef.decompose(game.graph, tree):
            c = float(level.increment)
            y = ef.enforce_level(level, tree)
            assert all(0 <= v <= c for _, v in y.items())
            for v in tree.order[1:]:
                cost = 0.0
                node = v
                while node != tree.root:
                    a = tree.parent_edge[node]
                    cost += ef.virtual_cost(level, a, y[a])
                    node = tree.parent[node]
                assert cost <= c + 1e-9


def test_unit_path_cuts_the_middle_edge():
    game, tree = gen_cycle(3)
    (level,) = ef.decompose(game.graph, tree)
    y = ef.enforce_level(level, tree)
    assert y[0] == 0.0
    assert y[1] == pytest.approx(3 / math.e - 1)
    assert y[1] == pytest.approx(0.103638, abs=1e-6)
    assert y[2] == 1.0


def test_fractional_needs_broadcast_game():
    game, tree = star()
    with pytest.raises(MethodMismatchError):
        ef.enforce_fractional(GeneralGame(game.graph, ((1, 0),)), tree)


def test_float_subsidy_rational_copy():
    game, tree = star()
    b = ef.FloatSubsidy({0: 0.25, 1: 2.0000000001, 2: -1e-15})
    exact = b.to_assignment(game.graph)
    assert exact[0] == Fraction(1, 4)
    assert exact[1] == 2
    assert exact[2] == 0
    assert b[3] == 0.0
    assert ef.FloatSubsidy({0: 0.9999999999}).to_assignment(game.graph)[0] == 1
    with pytest.raises(InvalidSubsidyError):
        ef.FloatSubsidy({0: 1.5}).to_assignment(game.graph)
    with pytest.raises(InvalidSubsidyError):
        ef.FloatSubsidy({1: -1e-6}).to_assignment(game.graph)
    loose = ef.FloatSubsidy({0: 1.001}, tolerance=1e-2)
    assert loose.to_assignment(game.graph)[0] == 1


def test_integral_search_on_small_path():
    game, tree = gen_aon_path(6)
    result = ef.min_integral_subsidy_exact(game, tree)
    assert result is not None
    assert result.subsidies.integral
    assert is_equilibrium_broadcast(game, tree, result.subsidies).ok
    cheapest = min(
        sum((game.graph.edges[a].weight for a in chosen), Fraction(0))
        for chosen in ef.iter_enforcing_integral(game, tree)
    )
    assert result.cost == cheapest
    assert result.cost >= min_subsidy(game, tree).cost
    assert result.cost <= aon_path_bound(6).all_light


def test_integral_search_parallel_agrees():
    game, tree = gen_aon_path(12)
    serial = ef.min_integral_subsidy_exact(game, tree)
    parallel = ef.min_integral_subsidy_exact(game, tree, jobs=2)
    assert serial == parallel


def test_integral_search_none_when_candidates_cannot_help():
    game, tree = gen_cycle(3)
    # with only the root edge paid for, v3 still pays 3/2 against a unit deviation
    assert ef.min_integral_subsidy_exact(game, tree, candidates=[0]) is None
    assert list(ef.iter_enforcing_integral(game, tree, candidates=[0])) == []


def test_integral_search_cap():
    game, tree = gen_aon_path(6)
    with pytest.raises(CapExceededError) as info:
        ef.min_integral_subsidy_exact(game, tree, cap=3)
    assert info.value.count == 6


def test_all_or_nothing_path_of_five_pays_every_light_edge():
    game, tree = gen_aon_path(5)
    result = ef.min_integral_subsidy_exact(game, tree)
    assert result.cost == 4 * aon_x(5)
    assert result.subsidies.support == frozenset({0, 1, 2, 3})


@pytest.mark.slow
def test_all_or_nothing_gap_at_twenty():
    game, tree = gen_aon_path(20)
    result = ef.min_integral_subsidy_exact(game, tree, jobs=4)
    x = aon_x(20)
    assert result.cost == 19 * x
    assert result.cost / (1 + 19 * x) >= Fraction(58, 100)
