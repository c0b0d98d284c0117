"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(RuntimeError):
    """A precondition on the discretization was violated."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge.

    The last achieved residual (or extrapolation defect) is kept in
    :attr:`residual`.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class BesselUnderflowWarning(RuntimeWarning):
    """K_nu(z) underflowed to zero."""


class SmallTruncationWarning(UserWarning):
    """Truncation height Y is below 1/sqrt(lambda_1)."""
