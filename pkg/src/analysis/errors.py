# File: analysis/errors.py
class AnalysisError(ValueError):
    """Base class for analysis failures that stem from the input data."""


class BucketGap(AnalysisError):
    pass


class InvalidBucketSpec(AnalysisError):
    pass


class MissingSourceError(AnalysisError):
    """An analysis needs a snapshot source the run was not given."""
