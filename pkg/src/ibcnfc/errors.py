"""Exception hierarchy shared by every layer of the stack."""


class IbcError(Exception):
    """Base class for all domain errors raised by this package."""


class DivisionByZero(IbcError, ZeroDivisionError):
    pass


class ParamMismatch(IbcError, ValueError):
    """Operands live in different fields or curves."""


class ParamError(IbcError, ValueError):
    """Requested parameter sizes are out of range."""


class SearchExhausted(IbcError):
    pass


class HashToPointFailure(IbcError):
    pass


class ZeroEvaluation(IbcError):
    """A Miller line function vanished at the evaluation point."""


class SetupError(IbcError):
    pass


class InvalidIdentity(IbcError, ValueError):
    pass


# the protocol layer speaks of "IdentityInvalid"; same condition
IdentityInvalid = InvalidIdentity


class RngFailure(IbcError):
    pass


class AuthenticationFailure(IbcError):
    pass


class MalformedCiphertext(IbcError, ValueError):
    pass


class MalformedBlob(IbcError, ValueError):
    """A serialized parameter, point, key or state blob failed to parse."""


class FrameMalformed(IbcError, ValueError):
    pass


class HandshakeFailure(IbcError):
    pass


class ReplayDetected(IbcError):
    pass


class NotEstablished(IbcError):
    pass


class InsufficientEntropy(IbcError):
    pass
