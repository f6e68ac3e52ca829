"""Exception types shared across the package."""


class GeoQuadError(Exception):
    """Base class for all package errors."""


class ValidationError(GeoQuadError, ValueError):
    """An input violates a documented invariant."""


class ParseError(GeoQuadError, ValueError):
    """A scenario document could not be read."""


class SymmetricInput(ValidationError):
    """vee() was handed a matrix that is not skew-symmetric."""


class CapTooLarge(ValidationError):
    """Requested sublevel cap on the attitude error exceeds the admissible range."""


class Degenerate(GeoQuadError, ArithmeticError):
    """Matrix is too close to singular for the requested projection."""


class DegenerateBearing(Degenerate):
    """A bearing vector has (near) zero length."""


class NumericalError(GeoQuadError, ArithmeticError):
    """Base for failures raised while integrating or solving."""

    def __init__(self, msg, t=None):
        if t is not None:
            msg = f"{msg} (t={t:.6g})"
        super().__init__(msg)
        self.t = t


class SingularMass(NumericalError):
    pass


class NonFinite(NumericalError):
    pass


class Diverged(NumericalError):
    pass


class DegenerateThrust(NumericalError):
    """Desired thrust vector has vanished, so no attitude command exists."""


class ParallelHeading(NumericalError):
    """Desired heading is parallel to the thrust axis."""


class NotHurwitz(NumericalError):
    pass


class NotStabilizable(NumericalError):
    pass


class GimbalNear(NumericalError):
    """Minimal-coordinate chart is too close to its singularity."""
