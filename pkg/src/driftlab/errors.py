"""Exception types shared across the package."""


class DriftlabError(Exception):
    """Base class for all package errors."""


class InputError(DriftlabError, ValueError):
    """Malformed argument: wrong dimension, out-of-range value, unknown class id."""


class ConfigError(DriftlabError, ValueError):
    """Invalid configuration value or combination."""


class ParseError(DriftlabError, ValueError):
    """A data file could not be parsed.  ``row`` is 1-based when known."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class IntegrityError(DriftlabError):
    """Loaded data disagrees with its descriptor or manifest."""


class ProtocolError(DriftlabError):
    """The prequential protocol was violated (e.g. an unlabeled instance)."""


class UndefinedMetricError(DriftlabError, ValueError):
    """A metric was requested over no data."""


class ScheduleError(DriftlabError, ValueError):
    """A concept schedule is inconsistent."""


class TrainingError(DriftlabError):
    """A batch model could not be fitted."""
