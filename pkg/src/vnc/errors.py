"""Exception hierarchy shared by the library and the CLI."""


class VncError(Exception):
    """Base class for all errors raised by this package."""


class MetricSingular(VncError):
    """The metric is singular, ill-conditioned or not positive definite."""


class NumericalFailure(VncError):
    """A computation produced non-finite values.

    ``t`` holds the last simulation time at which the state was finite,
    when the failure happened inside an integration.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class RankDeficientConstraints(VncError):
    """The constraint one-forms are not linearly independent at q."""


class TransversalityFailure(VncError):
    """The input distribution meets the constraint distribution at q."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DimensionMismatch(VncError):
    """Array or field dimensions are inconsistent."""


class ConfigError(VncError):
    """Invalid simulation configuration or system definition.

    ``line`` and ``column`` are 1-based positions in the source document
    when known.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class InsufficientData(VncError):
    """Too few usable samples for a decay-rate fit."""
