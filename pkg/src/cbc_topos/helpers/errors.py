from typing import Any, Optional


class ToposError(ValueError):
    """Base for all input errors raised by cbc_topos. Carries an optional witness."""

    def __init__(self, message: str, witness: Optional[Any] = None) -> None:
        super().__init__(message)
        self.witness = witness


class InternalConsistencyError(RuntimeError):
    """Two computations that must agree did not. Always a bug, never bad input."""
