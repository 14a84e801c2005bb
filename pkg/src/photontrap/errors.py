"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid argument: out-of-range sizes, mismatched bases, bad kinds."""


class NumericalError(RuntimeError):
    """A numerical routine failed (eigensolver non-convergence, underflow)."""
