"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when caller-supplied data is malformed (shapes, ranges, non-finite entries)."""


class InfeasibleSetError(ValueError):
    """Raised when an affine set has no solution (inconsistent constraints)."""


class ConsistencyError(RuntimeError):
    """Raised when two independent computations of the same verdict disagree."""
