class CorrQcdError(ValueError):
    """Base class for input and parameter errors raised by this package."""


class ParameterError(CorrQcdError):
    pass


class DegenerateInputError(CorrQcdError):
    """A data block cannot produce a correlation matrix."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InfiniteEstimateError(CorrQcdError):
    """The rate MLE diverges because every transformed sample is zero."""
