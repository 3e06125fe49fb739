"""Exception types shared across the package."""


class DcprogError(Exception):
    """Base class for all package-specific errors."""


class InfeasibleIterateError(DcprogError):
    """Raised when an iterate falls outside the domain of the prox-capable part."""


class ActiveSetOverflowError(DcprogError):
    """Active-piece enumeration exceeded its cap.

    The residual (or the epsilon-active step) is then not certifiable; callers
    must report this outcome distinctly instead of silently truncating.
    """

    def __init__(self, message, cap=None, count=None):
        super().__init__(message)
        self.cap = cap
        self.count = count


class RetryExhaustedError(DcprogError):
    """Perturbation retries ran out without finding a singleton active gradient.

    Under exact arithmetic this event has probability zero; hitting it in
    floating point flags a degenerate problem encoding or a tie-tolerance
    misconfiguration.
    """

    def __init__(self, message, retries=None):
        super().__init__(message)
        self.retries = retries


class SubproblemSolverError(DcprogError):
    """Inner convex solver failed; carries the last iterate for diagnostics."""

    def __init__(self, message, last_iterate=None, residual_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm


class NewtonBudgetError(SubproblemSolverError):
    """Semismooth Newton iteration cap reached before the gradient tolerance."""


class LineSearchError(SubproblemSolverError):
    """Armijo backtracking failed to produce acceptable decrease."""


class BoundednessError(DcprogError):
    """Iterate norm exceeded the configured ceiling; the run is declared failed."""
