"""Exception types shared by every module."""

from __future__ import annotations


class DomainError(ValueError):
    """Input violates an operation's precondition.

    ``code`` is a short machine-readable tag that the CLI copies into its
    error object.
    """

    def __init__(self, message: str, code: str = "domain_error"):
        super().__init__(message)
        self.code = code


class StructuralFailure(RuntimeError):
    """An identity that must hold by construction was found violated."""
