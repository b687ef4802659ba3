"""Exception types shared across the package."""


class AdkgError(Exception):
    """Base class for all package errors."""


class SchemaError(AdkgError):
    """Input table does not match its declared modality schema."""


class DataError(AdkgError):
    """Input values violate a precondition (domain, missingness, degeneracy)."""


class ConvergenceError(AdkgError):
    """An iterative solver failed to converge or diverged."""


class GraphError(AdkgError):
    """A graph operation is undefined on the given graph."""


class ProviderError(AdkgError):
    """An LLM provider or literature client call failed."""

    def __init__(self, message, *, permanent=False):
        super().__init__(message)
        self.permanent = permanent


class ParseError(AdkgError):
    """A model response could not be parsed into hypotheses."""

    def __init__(self, message, *, raw=None, position=None):
        super().__init__(message)
        self.raw = raw
        self.position = position


class PipelineError(AdkgError):
    """A pipeline stage cannot run (missing prerequisite, bad config)."""
