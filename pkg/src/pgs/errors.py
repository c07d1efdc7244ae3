"""Exception types raised across the package."""


class PGSError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(PGSError, ValueError):
    pass


class ZeroVector(PGSError, ValueError):
    pass


class BaseMismatch(PGSError, ValueError):
    """A tangent vector was used at a point other than its base point."""


class HemisphereViolation(PGSError, ValueError):
    """Inverse retraction requested between points not in the same open hemisphere."""


class NegativeScale(PGSError, ValueError):
    pass


class DegenerateProx(PGSError, ArithmeticError):
    """The proximal point left the open hemisphere of the current iterate."""


class LineSearchExhausted(PGSError, RuntimeError):
    pass


class SearchExhausted(PGSError, RuntimeError):
    pass


class DegenerateCloud(PGSError, ValueError):
    pass


class DegenerateLine(PGSError, ValueError):
    pass


class TooFewCorrespondences(PGSError, ValueError):
    pass


class TooFewCameras(PGSError, ValueError):
    pass


class RankDeficiencyViolation(PGSError, ValueError):
    pass


class RectificationDegenerate(PGSError, ArithmeticError):
    pass


class NegativeEigenvalues(PGSError, ArithmeticError):
    """A recovered dual absolute quadric is not positive semi-definite of rank 3."""


class ConfigError(PGSError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
