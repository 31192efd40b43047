"""Exception hierarchy.

Everything the CLI maps to exit status 1 derives from :class:`ValidationError`;
:class:`IoFailure` maps to exit status 2.
"""


class ConflictEngineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ConflictEngineError, ValueError):
    pass


class InvalidLocation(ValidationError):
    pass


class UnknownService(ValidationError):
    pass


class UnknownAttribute(ValidationError):
    pass


class InvertedInterval(ValidationError):
    pass


class InvalidEvent(ValidationError):
    pass


class MalformedLine(ValidationError):
    pass


class UnmappedSensor(ValidationError):
    pass


class NonOverlapping(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class UnknownPair(ValidationError):
    pass


class MissingAttribute(ValidationError):
    pass


class InfeasibleSpec(ValidationError):
    pass


class IoFailure(ConflictEngineError, OSError):
    pass
