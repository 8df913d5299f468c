"""Exception types raised across the package."""


class GradfluxError(Exception):
    pass


class ParseError(GradfluxError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(GradfluxError, ValueError):
    def __init__(self, key, message=""):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class GapViolation(GradfluxError, ValueError):
    pass


class DegenerateInterval(GradfluxError, ValueError):
    pass


class EnvelopeFailure(GradfluxError, RuntimeError):
    pass


class DomainMismatch(GradfluxError, ValueError):
    pass


class InconsistentPlateau(GradfluxError, ValueError):
    pass


class AmbiguousTheta(GradfluxError, ValueError):
    pass


class EqualStates(GradfluxError, ValueError):
    pass


class BlowUp(GradfluxError, RuntimeError):
    pass


class ZeroWidth(GradfluxError, ValueError):
    pass


class DegenerateData(GradfluxError, ValueError):
    pass


class EventOverflow(GradfluxError, RuntimeError):
    pass


class SnapshotMismatch(GradfluxError, ValueError):
    pass


class PreconditionViolation(GradfluxError, ValueError):
    pass
