"""Exception hierarchy shared by every stage of the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class DataError(PipelineError):
    """Bad input data: unreadable files, malformed rows, invariant violations."""


class ComputationError(PipelineError):
    """A numeric procedure failed: non-convergence, unsupported graph op, etc."""
