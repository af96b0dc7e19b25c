"""Exception hierarchy shared by every protocol module."""


class RSPError(Exception):
    """Base class for all errors raised by finitersp."""


class DimensionError(RSPError, ValueError):
    pass


class InvalidInputError(RSPError, ValueError):
    pass


class DegenerateSchmidtError(InvalidInputError):
    """A Schmidt coefficient is (numerically) zero."""


class InvalidDensityError(InvalidInputError):
    pass


class InvalidMeasurementError(InvalidInputError):
    pass


class NotMajorizedError(InvalidInputError):
    pass


class RadiusBoundError(InvalidInputError):
    pass


class ConditionViolatedError(RSPError):
    """The ensemble condition sum_m p_m u_m^dag |Phi><Phi| u_m = diag(alpha^2) fails."""


class DecompositionError(RSPError):
    pass


class CoverBuildError(RSPError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class CoverageMissError(RSPError):
    pass
