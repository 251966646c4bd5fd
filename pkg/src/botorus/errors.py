"""Exception hierarchy shared by all modules."""


class BOError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BOError, ValueError):
    pass


class AliasingError(BOError, ValueError):
    pass


class DomainError(BOError, ValueError):
    pass


class InvariantError(BOError, ValueError):
    """An input violates a structural invariant (e.g. reality of a potential)."""


class TruncationError(BOError, RuntimeError):
    """The finite section of the Lax operator is not converged for the request."""


class NearSingularError(BOError, ZeroDivisionError):
    pass


class DegeneratePhaseError(BOError, RuntimeError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"cannot fix the phase of eigenfunction {index}")


class EigensolverError(BOError, RuntimeError):
    pass


class InverseError(BOError, RuntimeError):
    """Newton inversion of the Birkhoff map failed; carries the best residual seen."""

    def __init__(self, message, best_residual=float("nan"), best_potential=None):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual
        self.best_potential = best_potential


class InstabilityError(BOError, RuntimeError):
    pass
