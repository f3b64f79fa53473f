"""Exception types shared across the package.

Each maps onto one CLI exit code (see ``powerpart.cli``).
"""

from __future__ import annotations


class PowerPartError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class PreconditionError(PowerPartError, ValueError):
    """An input violates a documented precondition (domain errors included)."""

    exit_code = 2


class VerificationError(PowerPartError):
    """A checked mathematical invariant did not hold."""

    exit_code = 3


class ResourceError(PowerPartError):
    """A memory or term budget was exhausted.

    ``partial`` carries whatever was completed before the budget ran out.
    """

    exit_code = 4

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class SolverError(PowerPartError):
    """An iterative solver failed to converge."""

    exit_code = 4
