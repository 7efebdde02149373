"""Exception hierarchy for hystereact."""

from __future__ import annotations


class HysteresisError(Exception):
    """Base class for all library errors."""


class DomainViolation(HysteresisError):
    """An input left the domain of the active hysteresis branch.

    Usually a missed switch: the time step was too large for the relay to
    see the threshold before the branch was evaluated.
    """

    def __init__(self, message: str, node: int | None = None, value: float | None = None):
        super().__init__(message if node is None else f"{message} (node {node})")
        self.node = node
        self.value = value


class EvaluationOutsideDomain(DomainViolation):
    """A branch function was asked for a value outside its definition set."""


class InconsistentInitialData(HysteresisError):
    def __init__(self, node: int):
        super().__init__(f"initial profile and configuration are inconsistent at node {node}")
        self.node = node


class LinearSolveFailure(HysteresisError):
    pass


class MultipleRoots(HysteresisError):
    pass


class NoRoot(HysteresisError):
    pass


class WindowEmpty(HysteresisError):
    pass


class GridMismatch(HysteresisError):
    pass


class FoldCountMismatch(HysteresisError):
    pass


class NewtonDivergence(HysteresisError):
    def __init__(self, message: str, node: int | None = None, t: float | None = None):
        super().__init__(message)
        self.node = node
        self.t = t


class ContinuationStall(HysteresisError):
    pass


class ConfigError(HysteresisError):
    """Bad experiment configuration; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} [{', '.join(where)}]" if where else message)
        self.field = field
        self.line = line
