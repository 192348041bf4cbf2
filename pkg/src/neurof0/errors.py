"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed input data: bad CSV, inconsistent lengths, invalid config."""


class ModelFileError(DataError):
    """Corrupt, truncated, or incompatible classifier model file."""


class PipelineStageError(DataError):
    """A pipeline stage failed; the message names the stage."""
