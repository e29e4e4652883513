"""Exception hierarchy shared across the toolkit.

Every error a pipeline stage can raise derives from RopetwinError so batch
drivers (CLI, replay workers) can catch one type and report cleanly.
"""


class RopetwinError(Exception):
    """Base class for all toolkit errors."""


# --- simulation ---

class InvalidGeometryError(RopetwinError):
    """Rod construction input is geometrically unusable."""


class NumericInputError(RopetwinError):
    """Non-finite values fed to the simulator."""


class DivergenceError(RopetwinError):
    """Solver blew up; carries the frame index where it happened."""

    def __init__(self, message, frame=None):
        super().__init__(message)
        self.frame = frame


# --- extraction ---

class EmptyObservationError(RopetwinError):
    """No masked depth pixels in any view."""


class DegenerateInputError(RopetwinError):
    """Too few / zero-length inputs for a geometric operation."""


class TopologyError(RopetwinError):
    """Skeleton is not a single open curve (endpoint count != 2)."""


class UnresolvableJunctionError(RopetwinError):
    """Skeleton junction of degree >= 5; cannot pick a continuation."""


class LiftingError(RopetwinError):
    """No centerline vertex could be assigned a height."""


# --- demonstrations / datasets ---

class DemoParseError(RopetwinError):
    """Malformed demonstration record; carries the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class DemoOrderingError(RopetwinError):
    """Demonstration timestamps not strictly increasing."""


class DemoValidationError(RopetwinError):
    """Demonstration field out of tolerance (quaternion norm, openness)."""


class TooShortError(RopetwinError):
    """Demonstration has too few frames to resample."""


class SplitError(RopetwinError):
    """Dataset split impossible (e.g. held-out rope id absent)."""


class StateParseError(RopetwinError):
    """Malformed state-v1 particle file."""


# --- service ---

class ProtocolError(RopetwinError):
    """Malformed client websocket message; carries the reply error code."""

    def __init__(self, message, code="bad_message"):
        super().__init__(message)
        self.code = code


# --- evaluation ---

class NoDataError(RopetwinError):
    """Empty training set handed to a predictor."""


class DimensionError(RopetwinError):
    """Array shape mismatch in a metric."""
