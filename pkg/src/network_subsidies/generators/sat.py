"""
Module: generators.sat
3SAT-4 formulas and the gadget graph whose minimum spanning tree can be
enforced by subsidising light (unit) edges exactly when the formula is
satisfiable.

Literals are signed variable numbers as in DIMACS. Every appearance of a
literal ``l`` in clause ``c`` owns a gadget with nodes ``u(c,-l)`` (mid) and
``u(c,l)`` (far) joined to its anchor by two light tree edges: the top edge
anchor-mid and the bottom edge mid-far. The top edge belongs to E(-l), the
bottom edge to E(l).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from network_subsidies.errors import FormulaShapeError, FormulaTooLargeError, GeneratorError, SelfCheckError
from network_subsidies.generators.families import GraphBuilder
from network_subsidies.model import ONE, ZERO, BroadcastGame, SpanningTree

logger = logging.getLogger(__name__)

NUM_LABELS = 9
MIN_USABLE_LABEL = 7
MAX_APPEARANCES = 4
DEFAULT_HEAVY = 10**6

Clause = Tuple[int, int, int]


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: Tuple[Clause, ...]

    def variables(self) -> List[int]:
        return sorted({abs(lit) for clause in self.clauses for lit in clause})

    def validate(self) -> None:
        """Raises FormulaShapeError unless every clause has three distinct variables, each used at most four times."""
        problems = []
        counts: Dict[int, int] = {}
        for k, clause in enumerate(self.clauses):
            if len(clause) != 3:
                problems.append(f"clause {k + 1} has {len(clause)} literals")
            if len({abs(lit) for lit in clause}) != len(clause):
                problems.append(f"clause {k + 1} repeats a variable")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    problems.append(f"clause {k + 1} uses unknown variable {lit}")
                counts[abs(lit)] = counts.get(abs(lit), 0) + 1
        for var, count in sorted(counts.items()):
            if count > MAX_APPEARANCES:
                problems.append(f"variable {var} appears {count} times")
        if problems:
            raise FormulaShapeError("; ".join(problems))

    def satisfied_by(self, truth: Dict[int, bool]) -> bool:
        return all(any(truth.get(abs(lit), False) == (lit > 0) for lit in clause) for clause in self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    """Read ``p cnf V C`` followed by zero-terminated clauses; ``c`` lines are comments."""
    header: Optional[Tuple[int, int]] = None
    literals: List[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormulaShapeError(f"bad problem line: {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise FormulaShapeError(f"bad problem line: {line!r}") from None
            continue
        if header is None:
            raise FormulaShapeError("clause before the problem line")
        try:
            literals.extend(int(tok) for tok in line.split())
        except ValueError:
            raise FormulaShapeError(f"bad clause line: {line!r}") from None
    if header is None:
        raise FormulaShapeError("missing problem line")
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for lit in literals:
        if lit == 0:
            clauses.append(tuple(current))
            current = []
        else:
            current.append(lit)
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise FormulaShapeError(f"problem line announces {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def format_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"


def brute_force_satisfiable(formula: CnfFormula) -> Optional[Dict[int, bool]]:
    """First satisfying assignment in binary-counting order (variable 1 most significant), or None."""
    variables = list(range(1, formula.num_vars + 1))
    for values in itertools.product((False, True), repeat=len(variables)):
        truth = dict(zip(variables, values))
        if formula.satisfied_by(truth):
            return truth
    return None


@dataclass(frozen=True)
class LabelConstants:
    """n_9 = 7 and n_j = 4 n_{j+1}^2."""

    values: Tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        values = [0] * (NUM_LABELS + 1)
        values[NUM_LABELS] = 7
        for j in range(NUM_LABELS - 1, 0, -1):
            values[j] = 4 * values[j + 1] ** 2
        object.__setattr__(self, "values", tuple(values))

    def __getitem__(self, label: int) -> int:
        if not 1 <= label <= NUM_LABELS:
            raise KeyError(label)
        return self.values[label]


def label_variables(formula: CnfFormula) -> Dict[int, int]:
    """Greedy colouring of the co-occurrence graph, colour i -> label 9 - i."""
    conflicts = nx.Graph()
    conflicts.add_nodes_from(formula.variables())
    for clause in formula.clauses:
        conflicts.add_edges_from(itertools.combinations(sorted(abs(lit) for lit in clause), 2))
    colouring = nx.greedy_color(conflicts, strategy="largest_first")
    return {var: NUM_LABELS - colour for var, colour in sorted(colouring.items())}


@dataclass(frozen=True)
class GadgetEdges:
    clause: int
    literal: int
    label: int
    top: int
    bottom: int


@dataclass
class LightCatalog:
    """Light edges per literal and per gadget, plus the clause structure they encode."""

    gadgets: List[GadgetEdges]
    literal_edges: Dict[int, FrozenSet[int]]
    clauses: List[Tuple[int, ...]]

    @property
    def light(self) -> FrozenSet[int]:
        return frozenset(eid for g in self.gadgets for eid in (g.top, g.bottom))

    def edges_of(self, literal: int) -> FrozenSet[int]:
        return self.literal_edges.get(literal, frozenset())

    def variables(self) -> List[int]:
        return sorted({abs(lit) for lit in self.literal_edges})

    def is_light(self, subset: Iterable[int]) -> bool:
        return set(subset) <= self.light

    def is_balanced(self, subset: Iterable[int]) -> bool:
        """Exactly one light edge of every gadget is subsidised."""
        chosen = set(subset)
        return all((g.top in chosen) != (g.bottom in chosen) for g in self.gadgets)

    def is_consistent(self, subset: Iterable[int]) -> bool:
        """Per variable x the subsidised light edges are exactly E(x) or exactly E(-x)."""
        chosen = set(subset)
        for var in self.variables():
            pos, neg = self.edges_of(var), self.edges_of(-var)
            mine = chosen & (pos | neg)
            if mine != pos and mine != neg:
                return False
        return True

    def clause_condition_holds(self, subset: Iterable[int]) -> bool:
        chosen = set(subset)
        return all(any(self.edges_of(lit) <= chosen for lit in clause) for clause in self.clauses)

    def predicted_enforcing(self, subset: Iterable[int]) -> bool:
        chosen = set(subset)
        return (
            self.is_light(chosen)
            and self.is_balanced(chosen)
            and self.is_consistent(chosen)
            and self.clause_condition_holds(chosen)
        )

    def light_assignment_for(self, truth: Dict[int, bool]) -> FrozenSet[int]:
        """E(x) for true variables, E(-x) for false ones."""
        out: Set[int] = set()
        for var in self.variables():
            out |= self.edges_of(var if truth.get(var, False) else -var)
        return frozenset(out)

    def truth_from_light(self, subset: Iterable[int]) -> Optional[Dict[int, bool]]:
        """x = 1 exactly when E(x) is subsidised; None unless the subset is balanced and consistent."""
        chosen = set(subset)
        if not (self.is_light(chosen) and self.is_balanced(chosen) and self.is_consistent(chosen)):
            return None
        return {var: self.edges_of(var) <= chosen for var in self.variables()}


@dataclass
class SatInstance:
    game: BroadcastGame
    tree: SpanningTree
    catalog: LightCatalog
    constants: LabelConstants
    formula: CnfFormula
    labels: Dict[int, int]
    heavy: Fraction


def _u(c: int, lit: int) -> str:
    return f"u({c},{lit})"


def estimate_nodes(formula: CnfFormula, labels: Dict[int, int], constants: LabelConstants) -> int:
    """Each clause roughly carries n_j nodes for its smallest label j."""
    return 1 + sum(constants[min(labels[abs(lit)] for lit in clause)] + 16 for clause in formula.clauses)


def gen_3sat4(formula: CnfFormula, heavy: int = DEFAULT_HEAVY) -> SatInstance:
    """Build the gadget graph and its designated minimum spanning tree.

    Raises:
        FormulaShapeError: the formula is not 3SAT-4.
        FormulaTooLargeError: the formula needs a label below 7.
        SelfCheckError: a light edge of the tree does not carry n_j / n_j - 3 players.
    """
    formula.validate()
    if not formula.clauses:
        raise FormulaShapeError("formula has no clauses")
    constants = LabelConstants()
    labels = label_variables(formula)
    if min(labels.values()) < MIN_USABLE_LABEL:
        raise FormulaTooLargeError(
            f"formula needs label {min(labels.values())}; only labels {MIN_USABLE_LABEL}..{NUM_LABELS} are buildable",
            estimated_nodes=estimate_nodes(formula, labels, constants),
        )
    K = Fraction(heavy)
    n = constants

    b = GraphBuilder()
    b.node("r")
    tree: List[int] = []
    gadgets: List[GadgetEdges] = []
    ordered: List[Tuple[int, ...]] = []
    appearances: Dict[int, List[Tuple[int, int]]] = {}

    for c, clause in enumerate(formula.clauses):
        lits = tuple(sorted(clause, key=lambda lit: labels[abs(lit)]))
        ordered.append(lits)
        anchor = "r"
        for lit in lits:
            j = labels[abs(lit)]
            mid, far = _u(c, -lit), _u(c, lit)
            v1, v2, v3 = (f"v{k}({c},{lit})" for k in (1, 2, 3))
            for label in (mid, far, v1, v2, v3):
                b.node(label)
            top = b.edge(anchor, mid, ONE)
            bottom = b.edge(mid, far, ONE)
            tree.extend([top, bottom])
            tree.append(b.edge(anchor, v1, K))
            tree.append(b.edge(v1, v2, K))
            tree.append(b.edge(v3, far, K))
            b.edge(anchor, v3, K + Fraction(1, n[j] - 3))
            b.edge(v2, far, 3 * K / 2 - Fraction(1, n[j] + 1))
            gadgets.append(GadgetEdges(c, lit, j, top, bottom))
            appearances.setdefault(abs(lit), []).append((c, lit))
            anchor = far
        j1, j2, j3 = (labels[abs(lit)] for lit in lits)
        b.node(f"v({c})")
        tree.append(b.edge(f"v({c})", anchor, K))
        b.edge(f"v({c})", "r", K + Fraction(1, n[j1]) + Fraction(1, n[j2] - 3) + Fraction(1, n[j3] - 3))

    attached: Dict[str, int] = {}
    for var in sorted(appearances):
        j = labels[var]
        seq = appearances[var]
        for (ci, a), (cn, bl) in zip(seq, seq[1:]):
            u1, u2 = f"u1({ci},{cn},{a})", f"u2({ci},{cn},{a})"
            b.node(u1)
            b.node(u2)
            if a == bl:
                first, second = _u(ci, -a), _u(cn, -a)
                tree.append(b.edge(u1, first, K))
                b.edge(u1, second, K + Fraction(1, 2 * n[j]))
                tree.append(b.edge(u2, second, K))
                b.edge(u2, first, K + Fraction(1, 2 * n[j]))
            else:
                first, second = _u(ci, a), _u(cn, a)
                tree.append(b.edge(u1, first, K))
                b.edge(u1, second, K + Fraction(1, n[j]) + Fraction(1, 2 * n[j] ** 2))
                tree.append(b.edge(u2, second, K))
                b.edge(u2, first, K)
            attached[first] = attached.get(first, 0) + 1
            attached[second] = attached.get(second, 0) + 1

    problems = []
    for c, lits in enumerate(ordered):
        js = [labels[abs(lit)] for lit in lits]
        for i, lit in enumerate(lits):
            mid, far = _u(c, -lit), _u(c, lit)
            extra = {mid: 2 - attached.get(mid, 0)}
            if i == len(lits) - 1:
                extra[far] = n[js[i]] - 6 - attached.get(far, 0)
            else:
                extra[far] = n[js[i]] - n[js[i + 1]] - 7 - attached.get(far, 0)
            for node, count in extra.items():
                if count < 0:
                    problems.append(f"{node} needs {count} auxiliary nodes")
                for k in range(count):
                    label = f"aux({node[2:-1]},{k})"
                    b.node(label)
                    tree.append(b.edge(node, label, ZERO))
    if problems:
        raise GeneratorError(problems)

    graph = b.graph()
    game = BroadcastGame(graph, graph.node("r"))
    spanning = SpanningTree(graph, tree, game.root)
    for g in gadgets:
        want = (n[g.label], n[g.label] - 3)
        got = (spanning.usage[g.top], spanning.usage[g.bottom])
        if got != want:
            raise SelfCheckError(f"gadget ({g.clause},{g.literal}) light usage {got}, expected {want}")

    literal_edges: Dict[int, Set[int]] = {}
    for g in gadgets:
        literal_edges.setdefault(g.literal, set()).add(g.bottom)
        literal_edges.setdefault(-g.literal, set()).add(g.top)
    catalog = LightCatalog(gadgets, {lit: frozenset(ids) for lit, ids in literal_edges.items()}, ordered)
    logger.info("3SAT-4 graph: %d nodes, %d edges, labels %s", graph.num_nodes, graph.num_edges, labels)
    return SatInstance(game, spanning, catalog, constants, formula, labels, K)
