"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class LcmgSpectraError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(LcmgSpectraError, TypeError):
    """Operands live in different groups/quotients, or a graph is malformed."""


class LevelRangeError(LcmgSpectraError, IndexError):
    """A quotient level outside the chain was requested."""


class ResourceCapError(LcmgSpectraError):
    """A configured size cap would be exceeded."""

    def __init__(self, what: str, requested: int, cap: int):
        self.what = what
        self.requested = requested
        self.cap = cap
        super().__init__(f"{what}: requested {requested} exceeds cap {cap}")


class DomainError(LcmgSpectraError, ValueError):
    """Input is outside the mathematical domain of the operation."""


class NumericError(LcmgSpectraError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class ConfigError(LcmgSpectraError, ValueError):
    """Invalid experiment configuration or expression."""
