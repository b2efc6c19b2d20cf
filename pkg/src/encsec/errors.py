"""Exception hierarchy shared by every module."""


class EncsecError(Exception):
    pass


class DomainError(EncsecError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NotInvertible(DomainError):
    pass


class DecodeError(EncsecError, ValueError):
    """A ciphertext, key or envelope is malformed."""


class EncodingOverflow(DomainError):
    """A real value does not fit the encoder's representable range."""


class RankDeficient(EncsecError, ArithmeticError):
    pass


class BudgetExceeded(EncsecError, RuntimeError):
    """Raised to an adversary that queries the oracle past its budget."""
