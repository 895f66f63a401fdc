"""Exception types shared across the package."""


class BreakthroughsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BreakthroughsError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateFitError(BreakthroughsError, ValueError):
    """Percentile observations cannot determine a positive-scale model."""


class InsufficientDataError(BreakthroughsError, ValueError):
    """Fewer than two usable percentile observations for an institution."""


class EmptyInputError(BreakthroughsError, ValueError):
    """An aggregate was requested over an empty collection."""


class InputFormatError(BreakthroughsError):
    """An input file is unreadable or its header is malformed."""
