"""Exception types shared across the toolkit."""


class KsiError(Exception):
    """Base class for all toolkit errors."""


class LogParseError(KsiError):
    """A session or plan file line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class LogOrderError(KsiError):
    """Event timestamps are not monotonically non-decreasing."""

    def __init__(self, index: int, message: str):
        super().__init__(f"event {index}: {message}")
        self.index = index


class GeometryError(KsiError):
    """Degenerate geometry: collinear point cloud, off-screen ring layout, etc."""


class NoDepthError(KsiError):
    """Stereo disparity is zero or negative; depth is undefined."""


class TrackingGapError(KsiError):
    """A required marker is missing from a sensor frame."""


class OutOfRangeError(KsiError):
    """A coordinate lies outside its declared rectangle."""


class IncompleteTrialError(KsiError):
    """The event stream ended before the trial plan was completed."""

    def __init__(self, message: str, block: int, set_index: int, target_index: int):
        super().__init__(message)
        self.block = block
        self.set_index = set_index
        self.target_index = target_index


class DataError(KsiError):
    """Invalid statistical input: too few points, nonpositive values, empty group."""
