#!/usr/bin/env python
"""
Module: main
Command-line front end. Reports go to stdout as compact JSON; logging goes to
stderr.

Exit codes: 0 success, 1 usage or input errors, 2 failed check or nothing
found, 3 a configured cap was hit.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from network_subsidies.config import Settings, load_settings
from network_subsidies.enforce import enforce_fractional, min_integral_subsidy_exact
from network_subsidies.errors import (
    CapExceededError,
    DynamicsCapError,
    IterationCapError,
    SelfCheckError,
    SubsidyGameError,
    UsageError,
)
from network_subsidies.game import (
    best_response_dynamics,
    cost_report,
    initial_state,
    is_equilibrium_broadcast,
    is_equilibrium_general,
    rosenthal_potential,
)
from network_subsidies.generators.families import (
    gen_aon_path,
    gen_binpack,
    gen_bypass,
    gen_cycle,
    gen_indepset,
)
from network_subsidies.generators.sat import gen_3sat4, parse_dimacs
from network_subsidies.model import (
    ONE,
    BroadcastGame,
    Game,
    SpanningTree,
    State,
    SubsidyAssignment,
    format_decimal,
    format_rational,
    minimum_spanning_tree,
    parse_rational,
)
from network_subsidies.oracles import best_equilibrium, grid_min_subsidy, pos_report, stable_network_design
from network_subsidies.schemas import (
    dump,
    load_game,
    load_subsidies,
    load_tree,
    load_tree_ids,
    save_game,
    save_subsidies,
    save_tree,
    to_dot,
)
from network_subsidies.sne import Method, min_subsidy

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2
EXIT_CAP = 3

K4_EDGES = "0-1,0-2,0-3,1-2,1-3,2-3"


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- helpers ---------------------------------------------------------------


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, separators=(",", ":")))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _int_list(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _decimal(settings: Settings, value: Any) -> str:
    return format_decimal(value, settings.decimal_digits)


def _load_game(args) -> Game:
    return load_game(_read(args.game))


def _require_broadcast(game: Game, command: str) -> BroadcastGame:
    if not isinstance(game, BroadcastGame):
        raise UsageError(f"{command} needs a broadcast game (a file with 'root')")
    return game


def _target(game: Game, tree_path: str):
    """A SpanningTree for broadcast games, a State routed over the listed edges otherwise."""
    text = _read(tree_path)
    if isinstance(game, BroadcastGame):
        return load_tree(text, game)
    return State.from_edge_set(game, load_tree_ids(text))


def _maybe_dot(args, game: Game, tree: Optional[SpanningTree] = None, subsidies: Optional[SubsidyAssignment] = None) -> None:
    if getattr(args, "dot", None):
        _write(args.dot, to_dot(game.graph, tree, subsidies))


# -- gen -------------------------------------------------------------------


def _tree_out(args) -> str:
    if args.tree_out:
        return args.tree_out
    out = Path(args.output)
    return str(out.with_name(out.stem + ".tree.json"))


def _save_instance(args, game: BroadcastGame, tree: SpanningTree, extra: Dict[str, Any]) -> int:
    _write(args.output, save_game(game))
    _write(_tree_out(args), save_tree(tree))
    _maybe_dot(args, game, tree)
    payload = {
        "family": args.family,
        "nodes": game.graph.num_nodes,
        "edges": game.graph.num_edges,
        "tree_weight": format_rational(tree.weight),
    }
    payload.update(extra)
    _emit(payload)
    return EXIT_OK


def cmd_gen(args, settings: Settings) -> int:
    family = args.family
    if family == "bypass":
        game, tree, layout = gen_bypass(args.kappa, args.beta)
        return _save_instance(args, game, tree, {"ell": layout.ell, "bypass_edge": layout.bypass_edge})
    if family == "binpack":
        inst = gen_binpack(_int_list(args.sizes), args.bins, args.capacity)
        if args.assignment:
            assignment = tuple(_int_list(args.assignment))
        else:
            assignment = next((a for a in inst.assignments() if inst.is_packing(a)), None)
            if assignment is None:
                assignment = next(iter(inst.assignments()))
        tree = inst.tree_for_assignment(assignment)
        return _save_instance(
            args, inst.game, tree, {"K": format_rational(inst.K), "assignment": list(assignment)}
        )
    if family == "indepset":
        pairs = []
        for tok in (args.edges or K4_EDGES).split(","):
            a, _, b = tok.partition("-")
            try:
                pairs.append((int(a), int(b)))
            except ValueError:
                raise UsageError(f"bad edge {tok!r}; expected a-b") from None
        inst = gen_indepset(pairs, parse_rational(args.delta))
        chosen = _int_list(args.independent_set) if args.independent_set else []
        tree = inst.tree_for_independent_set(chosen)
        return _save_instance(args, inst.game, tree, {"independent_set": sorted(chosen)})
    if family == "cycle":
        game, tree = gen_cycle(args.n)
        return _save_instance(args, game, tree, {})
    if family == "aon-path":
        game, tree = gen_aon_path(args.n, settings.e_hat_value)
        return _save_instance(args, game, tree, {})
    if family == "sat":
        heavy = args.heavy if args.heavy is not None else settings.sat_heavy_weight
        inst = gen_3sat4(parse_dimacs(_read(args.cnf)), heavy)
        labels = {str(var): label for var, label in sorted(inst.labels.items())}
        return _save_instance(
            args, inst.game, inst.tree, {"labels": labels, "light_edges": sorted(inst.catalog.light)}
        )
    raise UsageError(f"unknown family {family!r}")


# -- check and solvers -----------------------------------------------------


def _verify(game: Game, target, subsidies: Any, tol: float):
    if isinstance(target, SpanningTree):
        return is_equilibrium_broadcast(game, target, subsidies, tol=tol)
    return is_equilibrium_general(game, target, subsidies, tol=tol)


def cmd_check(args, settings: Settings) -> int:
    game = _load_game(args)
    target = _target(game, args.tree)
    subsidies = load_subsidies(_read(args.subsidies), game.graph) if args.subsidies else None
    verdict = _verify(game, target, subsidies, args.tol)
    print(verdict.to_json())
    if args.report:
        state = State.from_tree(game, target) if isinstance(target, SpanningTree) else target
        costs = {label: format_rational(cost) for label, cost in cost_report(game, state, subsidies)}
        _emit({"costs": costs})
    return EXIT_OK if verdict.ok else EXIT_FAILED


def cmd_solve_sne(args, settings: Settings) -> int:
    game = _load_game(args)
    target = _target(game, args.tree)
    result = min_subsidy(
        game, target, args.method, jobs=args.jobs, iteration_factor=settings.rowgen_iteration_factor
    )
    if not _verify(game, target, result.subsidies, 0).ok:
        raise SelfCheckError("optimal subsidies do not enforce the target")
    _write(args.output, save_subsidies(result.subsidies))
    _maybe_dot(args, game, target if isinstance(target, SpanningTree) else None, result.subsidies)
    logger.info("minimum subsidy %s ~ %s", result.cost, _decimal(settings, result.cost))
    _emit({"method": Method(args.method).value, "total": format_rational(result.cost)})
    return EXIT_OK


def cmd_enforce_frac(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "enforce-frac")
    if args.tree:
        tree = load_tree(_read(args.tree), game)
    else:
        tree = minimum_spanning_tree(game.graph, game.root)
    result = enforce_fractional(game, tree, settings.tolerance)
    verdict = is_equilibrium_broadcast(game, tree, result.subsidies, tol=settings.tolerance)
    if not verdict.ok:
        raise SelfCheckError(f"fractional subsidies leave player {verdict.label} a deviation")
    exact = result.subsidies.to_assignment(game.graph)
    _write(args.output, save_subsidies(exact))
    _maybe_dot(args, game, tree, exact)
    _emit(
        {
            "levels": len(result.levels),
            "total": _decimal(settings, result.total),
            "tree_weight": format_rational(tree.weight),
        }
    )
    return EXIT_OK


def cmd_solve_aon(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "solve-aon")
    tree = load_tree(_read(args.tree), game)
    if args.candidates == "light":
        candidates = [e.id for e in game.graph.edges if e.weight == ONE]
    else:
        candidates = sorted(tree.edge_ids)
    cap = args.cap if args.cap is not None else settings.integral_cap
    result = min_integral_subsidy_exact(game, tree, candidates, cap=cap, jobs=args.jobs)
    if result is None:
        _emit({"ok": False})
        return EXIT_FAILED
    _write(args.output, save_subsidies(result.subsidies))
    _maybe_dot(args, game, tree, result.subsidies)
    _emit({"ok": True, "total": format_rational(result.cost), "edges": sorted(result.subsidies.support)})
    return EXIT_OK


def cmd_solve_grid(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "solve-grid")
    tree = load_tree(_read(args.tree), game)
    denominator = args.denominator if args.denominator is not None else settings.grid_denominator
    cap = args.cap if args.cap is not None else settings.grid_cap
    total = grid_min_subsidy(game, tree, denominator, cap)
    _emit({"denominator": denominator, "total": format_rational(total)})
    return EXIT_OK


def cmd_pos(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "pos")
    cap = args.cap if args.cap is not None else settings.enumeration_cap
    report = pos_report(game, cap, jobs=args.jobs)
    if report is None:
        _emit({"ok": False})
        return EXIT_FAILED
    print(dump(report))
    return EXIT_OK


def cmd_best_eq(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "best-eq")
    cap = args.cap if args.cap is not None else settings.enumeration_cap
    found = best_equilibrium(game, cap, jobs=args.jobs)
    if found is None:
        _emit({"ok": False})
        return EXIT_FAILED
    if args.output:
        _write(args.output, save_tree(found.tree))
    _emit({"weight": format_rational(found.weight), "edges": sorted(found.tree.edge_ids)})
    return EXIT_OK


def cmd_dynamics(args, settings: Settings) -> int:
    if args.seed is not None and args.order != "random":
        raise UsageError("--seed only applies with --order random")
    game = _load_game(args)
    if args.tree:
        target = _target(game, args.tree)
        state = State.from_tree(game, target) if isinstance(target, SpanningTree) else target
    else:
        state = initial_state(game)
    subsidies = load_subsidies(_read(args.subsidies), game.graph) if args.subsidies else None
    max_rounds = args.max_rounds if args.max_rounds is not None else settings.max_dynamics_rounds
    result = best_response_dynamics(game, state, subsidies, order=args.order, seed=args.seed, max_rounds=max_rounds)
    if not is_equilibrium_general(game, result.state, subsidies).ok:
        raise SelfCheckError("dynamics stopped outside an equilibrium")
    _emit(
        {
            "rounds": result.rounds,
            "moves": result.moves,
            "potential": format_rational(rosenthal_potential(result.state, subsidies)),
            "edges": sorted(result.state.established()),
        }
    )
    return EXIT_OK


def cmd_snd(args, settings: Settings) -> int:
    game = _require_broadcast(_load_game(args), "snd")
    cap = args.cap if args.cap is not None else settings.enumeration_cap
    design = stable_network_design(game, parse_rational(args.budget), parse_rational(args.weight_bound), cap)
    if design is None:
        _emit({"ok": False})
        return EXIT_FAILED
    if args.output:
        _write(args.output, save_subsidies(design.subsidies))
    _emit(
        {
            "ok": True,
            "cost": format_rational(design.cost),
            "tree_weight": format_rational(design.tree.weight),
            "edges": sorted(design.tree.edge_ids),
        }
    )
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="network_subsidies", description="Subsidies for stable network designs")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--config", help="YAML file overriding the default settings")
    parser.add_argument("--jobs", type=int, default=1, help="worker count for enumerations and oracles")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate an instance family")
    families = gen.add_subparsers(dest="family", required=True, parser_class=_Parser)

    def family(name: str, help_text: str) -> argparse.ArgumentParser:
        p = families.add_parser(name, help=help_text)
        p.add_argument("-o", "--output", required=True, help="game JSON file")
        p.add_argument("--tree-out", help="designated tree file (default: <output stem>.tree.json)")
        p.add_argument("--dot", help="also write a Graphviz file")
        return p

    p = family("bypass", "bypass gadget with leaves on the connector")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--beta", type=int, default=0)
    p = family("binpack", "bin packing reduction")
    p.add_argument("--sizes", required=True, help="comma-separated even item sizes")
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--capacity", type=int, required=True)
    p.add_argument("--assignment", help="item -> bin list for the designated tree")
    p = family("indepset", "independent set reduction on a cubic graph")
    p.add_argument("--edges", help=f"cubic graph as a-b pairs (default K4: {K4_EDGES})")
    p.add_argument("--delta", default="1/12")
    p.add_argument("--independent-set", help="nodes receiving type B branches")
    p = family("cycle", "unit cycle")
    p.add_argument("--n", type=int, required=True)
    p = family("aon-path", "all-or-nothing lower-bound path")
    p.add_argument("--n", type=int, required=True)
    p = family("sat", "3SAT-4 gadget graph")
    p.add_argument("--cnf", required=True, help="DIMACS CNF file")
    p.add_argument("--heavy", type=int, help="heavy edge weight K")
    gen.set_defaults(handler=cmd_gen)

    p = sub.add_parser("check", help="is the tree (or state) an equilibrium")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--subsidies")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--report", action="store_true", help="also print per-player costs")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("solve-sne", help="minimum fractional subsidies")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.LP3.value)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot")
    p.set_defaults(handler=cmd_solve_sne)

    p = sub.add_parser("enforce-frac", help="1/e subsidies for a minimum spanning tree")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", help="defaults to the minimum spanning tree")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot")
    p.set_defaults(handler=cmd_enforce_frac)

    p = sub.add_parser("solve-aon", help="minimum all-or-nothing subsidies by exhaustive search")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--candidates", choices=["tree", "light"], default="tree")
    p.add_argument("--cap", type=int)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dot")
    p.set_defaults(handler=cmd_solve_aon)

    p = sub.add_parser("solve-grid", help="minimum subsidies on a 1/D grid (at most four tree edges)")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--denominator", type=int, help="grid step 1/D, D at most 12")
    p.add_argument("--cap", type=int)
    p.set_defaults(handler=cmd_solve_grid)

    p = sub.add_parser("pos", help="price of stability by enumeration")
    p.add_argument("--game", required=True)
    p.add_argument("--cap", type=int)
    p.set_defaults(handler=cmd_pos)

    p = sub.add_parser("best-eq", help="lightest equilibrium tree by enumeration")
    p.add_argument("--game", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("-o", "--output", help="write the tree")
    p.set_defaults(handler=cmd_best_eq)

    p = sub.add_parser("dynamics", help="best-response dynamics")
    p.add_argument("--game", required=True)
    p.add_argument("--tree", help="starting tree or edge set (default: shortest paths)")
    p.add_argument("--subsidies")
    p.add_argument("--seed", type=int)
    p.add_argument("--order", choices=["round_robin", "random"], default="round_robin")
    p.add_argument("--max-rounds", type=int)
    p.set_defaults(handler=cmd_dynamics)

    p = sub.add_parser("snd", help="stable network design by enumeration")
    p.add_argument("--game", required=True)
    p.add_argument("--budget", required=True)
    p.add_argument("--weight-bound", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("-o", "--output", help="write the subsidies")
    p.set_defaults(handler=cmd_snd)
    return parser


def _configure_logging(settings: Settings, verbose: int) -> None:
    level = {0: settings.log_level, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(
        level=getattr(logging, level),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        settings = load_settings(args.config)
        _configure_logging(settings, args.verbose)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        handler: Callable[[Any, Settings], int] = args.handler
        return handler(args, settings)
    except (CapExceededError, IterationCapError, DynamicsCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except SubsidyGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
