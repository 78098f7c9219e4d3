"""Exception types raised across the package."""


class InvalidStateError(ValueError):
    """Raised for non-finite parameters or covariance matrices that violate
    the uncertainty principle."""


class ConvergenceError(RuntimeError):
    """Raised when a numerical procedure fails to reach its tolerance."""


class TruncationError(ConvergenceError):
    """Raised when a Fock-space cutoff discards more probability than allowed.

    ``required_dim`` is the smallest cutoff that would satisfy the tolerance,
    when it can be computed.
    """

    def __init__(self, message: str, required_dim: int | None = None):
        super().__init__(message)
        self.required_dim = required_dim


class NonMonotoneError(ValueError):
    """Raised when a bisection bracket turns out not to be monotone."""
