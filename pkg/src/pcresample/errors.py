"""Exception types shared across the package."""


class ResampleError(Exception):
    """Base class for all errors raised by pcresample."""


class EmptyCloudError(ResampleError):
    """An operation received a cloud with no points."""


class DegenerateGeometryError(ResampleError):
    """Geometry too degenerate to proceed (flat bbox, collinear neighborhood, ...)."""


class InsufficientPointsError(ResampleError):
    """Fewer points available than an operation requires."""


class CloudParseError(ResampleError):
    """A cloud or label file could not be parsed.

    Carries the offending path and, when known, the line number or byte
    offset of the failure.
    """

    def __init__(self, message, path=None, line=None, byte=None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif byte is not None:
            loc = f" (byte {byte})"
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message}{loc}")
        self.path = path
        self.line = line
        self.byte = byte


class ConvergenceError(ResampleError):
    """Count refinement did not reach the target band within the iteration cap.

    ``best_cloud`` holds the closest-count subset seen; ``state`` the final
    refinement state including the full (radius, count) history.
    """

    def __init__(self, message, best_cloud=None, state=None):
        super().__init__(message)
        self.best_cloud = best_cloud
        self.state = state
