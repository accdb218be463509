"""Exception hierarchy shared by every nusat module."""

from __future__ import annotations


class NusatError(Exception):
    """Base class for all library errors."""


class DistributionError(NusatError, ValueError):
    """Invalid ensemble parameters or probability vectors.

    ``field`` names the offending input so callers (and the CLI) can point at it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class FormulaError(NusatError, ValueError):
    """A clause or formula violates the distinct-variable or range invariants."""


class DimacsError(FormulaError):
    """Malformed DIMACS CNF input."""

    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class RetryCapError(NusatError, RuntimeError):
    """Whole-tuple rejection sampling gave up on a clause."""

    def __init__(self, clause_index: int, attempts: int, collision_rate: float):
        super().__init__(
            f"clause {clause_index}: no collision-free variable tuple after "
            f"{attempts} attempts (observed collision rate {collision_rate:.6f})"
        )
        self.clause_index = clause_index
        self.attempts = attempts
        self.collision_rate = collision_rate


class ArityError(NusatError, ValueError):
    """Operation requires a different clause width."""


class SizeError(NusatError, ValueError):
    """Input too large for an exhaustive routine."""


class BudgetError(NusatError, RuntimeError):
    """Enumeration would exceed its work budget."""


class DomainError(NusatError, ValueError):
    """A closed-form bound was evaluated outside its preconditions."""


class GridError(NusatError, ValueError):
    """Not enough ensemble sizes to fit a trend."""


class BracketError(NusatError, RuntimeError):
    """Satisfiability probability does not cross the target inside the bracket."""

    def __init__(self, message: str, endpoints: dict):
        super().__init__(message)
        self.endpoints = endpoints
