"""Exception types raised across the pipeline."""


class MononavError(Exception):
    """Base class for all library errors."""


class UnsupportedFormat(MononavError, ValueError):
    pass


class CorruptData(MononavError, ValueError):
    pass


class DimensionMismatch(MononavError, ValueError):
    pass


class InvalidSigma(MononavError, ValueError):
    pass


class InvalidK(MononavError, ValueError):
    pass


class EmptyImage(MononavError, ValueError):
    pass


class OutOfBounds(MononavError, IndexError):
    pass


class UnknownLabel(MononavError, KeyError):
    pass


class EmptyIntersection(MononavError, ValueError):
    pass


class EmptyTrainingSet(MononavError, ValueError):
    pass


class SeedOutOfBounds(MononavError, ValueError):
    pass


class SeedNotFloor(MononavError, ValueError):
    pass


class NodeOutOfBounds(MononavError, IndexError):
    pass


class InvalidThresholds(MononavError, ValueError):
    pass


class DegenerateConfiguration(MononavError, ValueError):
    pass


class PointAtInfinity(MononavError, ArithmeticError):
    pass


class EmptyTestSet(MononavError, ValueError):
    pass


class StageError(MononavError):
    """Wraps an error raised inside a pipeline stage, naming the stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
