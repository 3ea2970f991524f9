"""Exception hierarchy shared by every protocol module."""


class CloakError(Exception):
    """Base class for all errors raised by cloakmat."""


class InvalidDimensionError(CloakError, ValueError):
    pass


class ParameterError(CloakError, ValueError):
    pass


class InvalidKeyError(CloakError, ValueError):
    pass


class KeygenFailureError(CloakError, RuntimeError):
    pass


class IllConditionedKeyError(CloakError, ArithmeticError):
    pass


class SingularDesignError(CloakError, ArithmeticError):
    pass


class UnderdeterminedDesignError(CloakError, ValueError):
    pass


class ConvergenceError(CloakError, ArithmeticError):
    pass


class SpectrumAssumptionError(CloakError, ArithmeticError):
    """The cloud's matrix has eigenvalues that are genuinely complex."""


class ParseError(CloakError, ValueError):
    pass


class MalformedHeaderError(ParseError):
    pass


class TruncatedPayloadError(ParseError):
    pass


class NonFiniteValueError(ParseError):
    pass


class VersionMismatchError(ParseError):
    pass


class MalformedValueError(ParseError):
    pass


class VerificationError(CloakError, ArithmeticError):
    """A cloud result failed its client-side check."""
