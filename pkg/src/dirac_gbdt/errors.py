"""Exception hierarchy.

Every mathematical precondition failure derives from :class:`DiracError`;
malformed input files raise :class:`SchemaError` instead.  The CLI maps the
two families to different exit codes.
"""


class DiracError(Exception):
    """Base class for violated mathematical preconditions."""


class SchemaError(ValueError):
    """Input data does not match the expected shape or encoding."""


# matrix substrate

class NotHermitian(DiracError):
    pass


class NotPositiveDefinite(DiracError):
    pass


class Singular(DiracError):
    pass


class NonConvergence(DiracError):
    pass


# GBDT core

class SingularA(Singular):
    pass


class S0NotPositive(NotPositiveDefinite):
    pass


class IdentityViolated(DiracError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IdentityDrift(DiracError):
    def __init__(self, message, k=None, residual=None):
        super().__init__(message)
        self.k = k
        self.residual = residual


class PotentialInvariantViolated(DiracError):
    pass


# Weyl function machinery

class ContractivityViolated(DiracError):
    pass


class PoleInLowerHalfPlane(ContractivityViolated, Singular):
    pass


class BoundViolated(DiracError):
    def __init__(self, message, r=None, excess=None):
        super().__init__(message)
        self.r = r
        self.excess = excess


class DegeneratePencil(DiracError):
    pass


# inverse problem

class NotContractive(ContractivityViolated):
    pass


class NotMinimal(DiracError):
    pass


class NoStabilizingSolution(DiracError):
    pass


class AdmissibilityViolated(DiracError):
    pass


class IllConditionedSubspace(UserWarning):
    """Closed-loop eigenvalues sit on (or numerically at) the real axis."""


# Verblunsky coefficients and asymptotics

class TopBlockSingular(Singular):
    pass


class NotStrictContraction(DiracError):
    pass


class SpectrumConflict(DiracError):
    pass


# stability harness

class ClassExitUnavoidable(DiracError):
    pass


class NewtonDiverged(DiracError):
    pass
