"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
0 success, 2 parse/model errors, 3 coherence, 4 total conflict, 5 solver.
"""

from __future__ import annotations


class CredalNetError(Exception):
    exit_code = 1


class DomainError(CredalNetError, ValueError):
    """Variables or domains do not fit together (e.g. target not a subset)."""

    exit_code = 2


class InvalidState(DomainError):
    """A per-variable state index is outside the variable's frame."""


class KindMismatch(CredalNetError, TypeError):
    """A precise and an interval valuation were mixed in one operation."""

    exit_code = 2


class CoherenceError(CredalNetError, ValueError):
    exit_code = 3

    def __init__(self, message: str, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion


class EmptyCredalSet(CoherenceError):
    """Probability intervals whose box does not meet the simplex."""


class ThresholdExceeded(CredalNetError):
    """Vertex enumeration was requested on a frame above the configured limit."""

    exit_code = 5


class TotalConflict(CredalNetError):
    exit_code = 4


class SolverError(CredalNetError):
    exit_code = 5


class Infeasible(SolverError):
    pass


class InvalidRule(CredalNetError, ValueError):
    exit_code = 2


class UnsatisfiableRule(InvalidRule):
    pass


class OrderError(CredalNetError, ValueError):
    """Elimination order is not a permutation of the non-query variables."""

    exit_code = 64


class ParseError(CredalNetError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}" if line is not None else ""
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.column = column
