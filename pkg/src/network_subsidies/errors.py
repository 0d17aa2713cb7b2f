"""Exception hierarchy shared by every network_subsidies module."""
from __future__ import annotations

from typing import Any, List, Optional


class SubsidyGameError(Exception):
    """Base class for all errors raised by network_subsidies."""


class ConfigError(SubsidyGameError):
    """Raised when the settings file cannot be read or validated."""


class UsageError(SubsidyGameError):
    """Raised when a command is invoked with inconsistent arguments."""


class GameFormatError(SubsidyGameError):
    """Raised when a game, tree or subsidy file is malformed (e.g. negative weight, self-loop)."""


class DisconnectedGraphError(SubsidyGameError):
    """Raised when a graph used as a game arena is not connected."""


class UnknownEdgeError(SubsidyGameError):
    """Raised when an edge id does not exist in the graph."""


class InvalidStateError(SubsidyGameError):
    """Raised when a strategy profile is not a set of simple paths joining each pair."""


class NotSpanningTreeError(SubsidyGameError):
    """Raised when an edge set is not a spanning tree of the graph."""


class NotMinimumSpanningTreeError(SubsidyGameError):
    """Raised when an operation requires a minimum spanning tree and gets another tree."""


class InvalidSubsidyError(SubsidyGameError):
    """Raised when a subsidy lies outside [0, w_a] or breaks the all-or-nothing rule."""


class MethodMismatchError(SubsidyGameError):
    """Raised when a solver method does not apply to the given game or state."""


class SimplexError(SubsidyGameError):
    """Raised when the simplex solver fails to verify its own optimum."""


class CapExceededError(SubsidyGameError):
    """Raised when an enumeration exceeds its configured cap.

    Attributes:
        count: number of objects enumerated (or requested) when the cap was hit.
    """

    def __init__(self, message: str, count: int) -> None:
        super().__init__(message)
        self.count = count


class IterationCapError(SubsidyGameError):
    """Raised when row generation hits its iteration cap; carries the last LP solution."""

    def __init__(self, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial


class DynamicsCapError(SubsidyGameError):
    """Raised when best-response dynamics exceeds its round limit; carries the last state."""

    def __init__(self, message: str, last_state: Any = None) -> None:
        super().__init__(message)
        self.last_state = last_state


class GeneratorError(SubsidyGameError):
    """Raised when generator preconditions fail. Every violated precondition is listed."""

    def __init__(self, problems: List[str]) -> None:
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class FormulaShapeError(SubsidyGameError):
    """Raised when a CNF formula is not a 3SAT-4 instance."""


class FormulaTooLargeError(SubsidyGameError):
    """Raised when a formula needs labels whose constants make the graph infeasible to build."""

    def __init__(self, message: str, estimated_nodes: Optional[int] = None) -> None:
        super().__init__(message)
        self.estimated_nodes = estimated_nodes


class SelfCheckError(SubsidyGameError):
    """Raised when a generated instance does not have the usage counts its construction prescribes."""
