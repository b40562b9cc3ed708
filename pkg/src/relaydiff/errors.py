"""Exception types shared across the package."""


class RelaydiffError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(RelaydiffError):
    """An argument or configuration value is out of its documented range."""


class ValidationError(RelaydiffError):
    """A data structure or file violates the documented schema.

    Messages name the offending field path (e.g. ``devices[3].id``) so that
    broken scenario/plan/trace files are diagnosable without a debugger.
    """


class RecoveryInfeasible(RelaydiffError):
    """Re-planning after a device failure found no feasible continuation.

    The partially executed run is preserved on the ``trace`` attribute so
    callers can inspect (and persist) everything up to the point of failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class LineageError(RelaydiffError):
    """A latent lineage was requested from a run that did not complete."""
