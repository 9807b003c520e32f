# where: phylotope/errors.py
# what: Exception hierarchy shared by the library and the command-line tools.
# why: Tools map these types to exit codes and hints without parsing messages.

from __future__ import annotations


class PhylotopeError(RuntimeError):
    """Base class for operational failures raised while counting."""

    exit_code = 1


class BudgetExceededError(PhylotopeError):
    """Raised when an enumeration would exceed a configured cap."""

    exit_code = 3

    def __init__(self, resource: str, requested: int, cap: int, subject: str, remedy: str | None = None) -> None:
        self.resource = resource
        self.requested = requested
        self.cap = cap
        self.subject = subject
        message = f"{resource} budget exceeded for {subject}: {requested} > cap {cap}"
        if remedy:
            message += f"; {remedy}"
        super().__init__(message)


class InfeasibleError(PhylotopeError):
    """Raised when a linear program has no feasible point (for example an empty slice)."""

    exit_code = 4


class MismatchError(ValueError):
    """Well-formed inputs that do not fit together (sockets, degrees, groups, dimensions)."""

    exit_code = 4


class StructuralError(ValueError):
    """Structural misuse of a tree, group or plan."""

    exit_code = 2


class TreeParseError(StructuralError):
    """Malformed Newick-like text."""

    def __init__(self, message: str, text: str, position: int | None = None) -> None:
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
