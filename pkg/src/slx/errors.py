"""Exception hierarchy shared by all slx modules."""

from __future__ import annotations


class SLXError(Exception):
    """Base class for every error raised by the package."""


# problem
class NonOscillationUndetermined(SLXError):
    pass


class QuadratureInconclusive(SLXError):
    pass


class PrincipalVanishes(SLXError):
    pass


class InvalidProblem(SLXError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ProblemFormatError(SLXError):
    pass


# odecore
class DerivativeUnavailable(SLXError):
    pass


class IntegrationDiverged(SLXError):
    pass


class WronskianDrift(SLXError):
    def __init__(self, message, drift=None):
        super().__init__(message)
        self.drift = drift


# weyl
class AtPole(SLXError):
    """Raised when a Weyl-type matrix is singular at the requested point.

    ``nullity`` is the numerical nullity of the matrix that failed to invert
    and ``which`` names it ("M0", "Minf", "theta", "relation").
    """

    def __init__(self, message, nullity=None, which=None):
        super().__init__(message)
        self.nullity = nullity
        self.which = which


class InadmissiblePair(SLXError):
    pass


# spectra
class GridTooCoarse(SLXError):
    pass


class UncoveredPoint(SLXError):
    def __init__(self, message, lam=None, certificate=None):
        super().__init__(message)
        self.lam = lam
        self.certificate = certificate


class OutsideResolventUnion(SLXError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NotAnEigenvalue(SLXError):
    pass


# lines
class AtPoleOfMinf(SLXError):
    pass


class ZeroParameter(SLXError):
    pass


class HypothesisViolated(SLXError):
    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class SearchExhausted(SLXError):
    def __init__(self, message, tried=()):
        super().__init__(message)
        self.tried = list(tried)


# specrep
class ResidueMismatch(SLXError):
    pass


# oracle
class FrameInaccurate(SLXError):
    pass


class SolverFailure(SLXError):
    pass
