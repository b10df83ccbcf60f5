"""Exception types raised across the package."""


class SubNyqError(Exception):
    """Base class for all errors raised by :mod:`subnyq`."""


class DomainError(SubNyqError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DegenerateModelError(SubNyqError, ValueError):
    """The signal model is degenerate (e.g. repeated delays)."""


class IllConditionedPulseError(SubNyqError, ValueError):
    """The pulse spectrum comes too close to zero on the working band."""


class FrontEndSingularError(SubNyqError):
    """The mixing matrix W is numerically singular at some grid bin."""

    def __init__(self, message, bin_index=None):
        super().__init__(message)
        self.bin_index = bin_index


class InsufficientChannelsError(SubNyqError, ValueError):
    """Too few sampling channels for the requested operation."""


class RankDeficientSubspaceError(SubNyqError):
    """The correlation matrix has fewer than K significant singular values."""


class ConfigError(SubNyqError, ValueError):
    """An experiment configuration violates its invariants."""
