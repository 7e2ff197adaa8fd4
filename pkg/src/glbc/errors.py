"""Exception hierarchy shared by every module."""


class GLBCError(Exception):
    """Base class for all errors raised by glbc."""


# fields
class NotPrimePower(GLBCError, ValueError):
    pass


class DegreeBoundExceeded(GLBCError, ValueError):
    pass


class NotSubfield(GLBCError, ValueError):
    pass


class ZeroElement(GLBCError, ValueError):
    pass


class LevelTooLarge(GLBCError, ValueError):
    pass


class ConductorMismatch(GLBCError, ValueError):
    pass


# cyclo
class NotRational(GLBCError, ArithmeticError):
    """A value expected to be an integer has a non-constant reduced form."""


class NotDivisible(GLBCError, ArithmeticError):
    pass


class BoundExceeded(GLBCError, ValueError):
    pass


# matrices
class SingularMatrix(GLBCError, ValueError):
    pass


class LevelMismatch(GLBCError, ValueError):
    pass


class DescentFailure(GLBCError, RuntimeError):
    pass


class NotSigmaStable(DescentFailure):
    pass


class PartitionMismatch(DescentFailure):
    pass


class NotInvariant(GLBCError, ValueError):
    pass


# chars
class NotRegular(GLBCError, ValueError):
    pass


class IncomparableSpecs(GLBCError, TypeError):
    pass


class GreenFormulaNotValidated(GLBCError, RuntimeError):
    """Verification sweeps refuse to run before the cuspidal formula is checked."""


# oracle
class BadPrime(GLBCError, RuntimeError):
    pass


class IdentificationAmbiguous(GLBCError, RuntimeError):
    pass


# mult
class ParityViolation(GLBCError, AssertionError):
    pass


class PredictorMismatch(GLBCError, AssertionError):
    def __init__(self, message, counterexamples=None):
        super().__init__(message)
        self.counterexamples = counterexamples or []


class PatternViolation(PredictorMismatch):
    pass


class IdentityViolation(PredictorMismatch):
    pass
