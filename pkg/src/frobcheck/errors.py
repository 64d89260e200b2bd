"""Exception hierarchy."""


class FrobeniusError(Exception):
    """Base class for all errors raised by frobcheck."""


class ParseError(FrobeniusError):
    pass


class ValidationFailed(FrobeniusError):
    pass


class DegenerateMetric(ValidationFailed):
    pass


class NonConstantEta(ValidationFailed):
    pass


class NonSemisimplePoint(FrobeniusError):
    pass


class EigensolverFailure(FrobeniusError):
    pass


class BranchMismatch(FrobeniusError):
    pass


class UndefinedEntry(FrobeniusError, LookupError):
    """Read of a diagonal entry of theta or Omega, which are defined only off the diagonal."""


class RecursionDepthExceeded(FrobeniusError):
    pass


class JetDegenerate(FrobeniusError):
    pass


class SingularM(FrobeniusError):
    pass
