"""Exception hierarchy shared across the package."""


class QpmpcError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QpmpcError, ValueError):
    pass


class NotInvertibleError(QpmpcError, ValueError):
    pass


class NoPeriodError(QpmpcError):
    pass


class LayoutError(QpmpcError, ValueError):
    pass


class UnsupportedSuperpositionError(QpmpcError):
    """The sparse engine only handles the operator preconditions the protocols use."""


class NonUnitaryError(QpmpcError, ValueError):
    pass


class WidthError(QpmpcError, ValueError):
    pass


class NormalizationError(QpmpcError):
    pass


class OwnershipError(QpmpcError):
    """A party touched a register it does not currently hold."""


class ProtocolReject(QpmpcError):
    """Raised when the returned register fails the |0> check."""

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class RoundsExhausted(QpmpcError):
    def __init__(self, message, best_candidate=None, history=()):
        super().__init__(message)
        self.best_candidate = best_candidate
        self.history = list(history)


class GuardError(QpmpcError):
    """Configuration exceeds the tractable sparse-simulation size."""


class PhaseError(QpmpcError):
    """An attack hook was requested at an instant where it is undefined."""


class InvariantBreach(QpmpcError):
    pass


class TruncatedTranscriptError(QpmpcError):
    pass


class EmptyBatchError(QpmpcError, ValueError):
    pass


class TrialError(QpmpcError):
    def __init__(self, index, cause):
        super().__init__(f"trial {index} failed: {cause!r}")
        self.index = index
        self.cause = cause
