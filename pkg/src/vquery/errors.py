"""Shared exception types for the query engine."""


class VQueryError(Exception):
    """Base class for all engine errors."""


class UnknownId(VQueryError):
    """A term id that was never assigned by the dictionary."""


class NullId(VQueryError):
    """Attempt to decode the reserved NULL marker id 0."""


class FrozenStore(VQueryError):
    """Mutation attempted after the store/dictionary was frozen."""


class NoSuitableIndex(VQueryError):
    """No stored index ordering can serve the requested scan."""


class UnsortedInput(VQueryError):
    """An operator that requires sorted input observed a decreasing key."""


class QueryMemoryExceeded(VQueryError):
    """A blocking operator exceeded its configured memory cap."""


class ParseError(VQueryError):
    """Query or data syntax error, with position information."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedFeature(VQueryError):
    """Recognized query-language feature outside the supported subset."""


class ContractViolation(VQueryError):
    """Internal operator protocol violation, e.g. skip() on unsorted output."""
