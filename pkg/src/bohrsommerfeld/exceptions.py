"""Exception hierarchy."""


class BohrSommerfeldError(Exception):
    """Base class for every error raised by this package."""


class NonElliptic(BohrSommerfeldError, ValueError):
    """Quadratic part is not positive definite (indefinite or singular)."""


class DegreeTooLow(BohrSommerfeldError, ValueError):
    """Polynomial is known to too low a degree for the requested order."""


class NoFixedPoint(BohrSommerfeldError):
    """Newton iteration on the gradient did not converge."""


class NonGeneric(BohrSommerfeldError):
    """Fixed point has a singular Hessian."""


class OrbitNotClosed(BohrSommerfeldError):
    """Trajectory did not return to its starting section."""


class OutOfWindow(BohrSommerfeldError, ValueError):
    """Requested action or energy lies outside the working window."""


class NotSymplectic(BohrSommerfeldError, ValueError):
    """Linear map does not have unit determinant."""


class OracleDiverged(BohrSommerfeldError):
    """Matrix eigenvalues failed to converge under resolution doubling."""


class Unbounded(BohrSommerfeldError, ValueError):
    """Symbol is not bounded below, so its spectrum has no ground state."""
