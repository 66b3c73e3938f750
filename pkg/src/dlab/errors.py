"""Exception hierarchy. CLI exit codes hang off the two base classes."""

from __future__ import annotations


class DlabError(Exception):
    exit_code = 1


class DataError(DlabError):
    """Bad or missing input data (exit code 3)."""

    exit_code = 3


class ParseError(DataError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"{message} at row {row}")
        self.row = row


class ValidationError(DataError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"{message} at row {row}")
        self.row = row


class EmptyPanelError(DataError):
    pass


class LeadingGapError(DataError):
    def __init__(self, series: str, message: str):
        super().__init__(message)
        self.series = series


class UnknownSeriesError(DataError):
    pass


class ProviderError(DataError):
    """The provider answered, but with an error body."""


class TransportError(DataError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RateLimitError(TransportError):
    pass


class ModelError(DlabError):
    """Numeric or model failure (exit code 4)."""

    exit_code = 4


class RankError(ModelError):
    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class ConvergenceError(ModelError):
    pass
