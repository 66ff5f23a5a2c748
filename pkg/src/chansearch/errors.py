"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """A requested construction exceeds its configured size guard."""


class DuplicateProbeError(RuntimeError):
    """The same link was probed twice within one session."""


class LocalityViolationError(RuntimeError):
    """A probe targeted a link that is not accessible under the session's mode."""


class InternalConsistencyError(RuntimeError):
    """A cross-checked invariant failed at runtime; indicates a bug, not bad input."""
