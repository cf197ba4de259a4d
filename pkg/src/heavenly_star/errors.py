"""Exception and warning types raised across the package."""


class HeavenlyError(Exception):
    """Base class for all package errors."""


class TruncationMismatch(HeavenlyError):
    pass


class GradingViolation(HeavenlyError):
    pass


class NotInAlgebraQ(HeavenlyError):
    pass


class NotInGroup(HeavenlyError):
    pass


class SingularBackground(HeavenlyError):
    pass


class NonCompatibleOneForm(HeavenlyError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonPolynomialIntegrand(HeavenlyError):
    pass


class SeedRejected(HeavenlyError):
    pass


class ChartMismatch(HeavenlyError):
    pass


class AnsatzExhausted(HeavenlyError):
    def __init__(self, message, system=None):
        super().__init__(message)
        self.system = system


class ContourSingularity(HeavenlyError):
    pass


class GuardBand(HeavenlyError):
    pass


class InterpolationOverflow(HeavenlyError):
    pass


class ResidualExceeded(HeavenlyError):
    def __init__(self, message, norms=None):
        super().__init__(message)
        self.norms = norms or {}


class LiouvilleViolation(HeavenlyError):
    def __init__(self, message, power=None, magnitude=None):
        super().__init__(message)
        self.power = power
        self.magnitude = magnitude


class SpecParseError(HeavenlyError):
    pass


class DegradedPrecision(UserWarning):
    """A computed term landed above the storage ceiling k_max and was dropped."""
