"""Exception types shared across the library."""


class VoterlimError(Exception):
    """Base class for all library errors."""


class ValidationError(VoterlimError):
    """Invalid parameters, file contents or experiment configuration."""


class DomainError(VoterlimError):
    """Coordinate outside the unit interval or unit square."""


class UnsupportedVariantError(VoterlimError):
    """Operation requires an exact step refinement the kernel cannot provide."""


class SizeLimitError(VoterlimError):
    """Requested dense problem size exceeds the configured guard."""


class SolverConvergenceError(VoterlimError):
    """Time stepper failed to reach its tolerance within the refinement budget."""
