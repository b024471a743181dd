"""Exception types raised across the package."""


class PointRFError(Exception):
    """Base class for every error raised by pointrf."""


class ContractViolation(PointRFError, ValueError):
    """An input broke a documented precondition (e.g. a non-unit direction)."""


class ConfigurationError(PointRFError, ValueError):
    pass


class DegenerateGeometryError(PointRFError, ValueError):
    pass


class HullTooSmallError(PointRFError):
    """Rejection sampling could not fill the requested point count."""

    def __init__(self, message, acceptance_rate):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class TrainingCollapseError(PointRFError):
    pass


class CheckpointError(PointRFError):
    pass


class DatasetError(PointRFError):
    pass


class SequenceError(PointRFError):
    """A video frame failed; ``frame`` is its index."""

    def __init__(self, frame, cause):
        super().__init__(f"frame {frame}: {cause}")
        self.frame = frame
