"""Exception hierarchy.

Parameter errors (bad inputs, violated preconditions) derive from
``ParameterError`` and map to CLI exit code 2; failures that only show up
while computing derive from ``NumericalError`` and map to exit code 3.
"""


class LidskiiError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(LidskiiError, ValueError):
    pass


class NumericalError(LidskiiError, ArithmeticError):
    pass


# -- operators -------------------------------------------------------------

class InvalidInterval(ParameterError):
    pass


class NonPositiveOrder(ParameterError):
    pass


class SignViolation(ParameterError):
    pass


class BetaTooLarge(ParameterError):
    pass


class EmptyCoefficients(ParameterError):
    pass


class CoefficientPositivity(ParameterError):
    pass


class SingularQ(ParameterError):
    pass


class NonAccretiveOperator(ParameterError):
    pass


# -- spectral --------------------------------------------------------------

class EigensolveFailure(NumericalError):
    pass


class SingularOperator(NumericalError):
    pass


class TooFewValues(ParameterError):
    pass


class NonPositiveDefinite(ParameterError):
    pass


class IndefiniteGram(ParameterError):
    pass


# -- contour ---------------------------------------------------------------

class DecayViolation(ParameterError):
    pass


class GeometryDegenerate(ParameterError):
    pass


class ToleranceUnreachable(NumericalError):
    pass


# -- solver ----------------------------------------------------------------

class ContourInvalid(NumericalError):
    """Some eigenvalue is not strictly enclosed by the contour."""


class SingularResolvent(NumericalError):
    """A quadrature node sits on (or numerically at) an eigenvalue."""


class ModeMismatch(ParameterError):
    pass


class ClusterOverlap(NumericalError):
    pass


class PreconditionViolation(ParameterError):
    pass


class ConfigError(ParameterError):
    pass
