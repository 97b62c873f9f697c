"""Exception types shared by every module."""


class GhxError(Exception):
    """Base class for all library errors."""


class ContractError(GhxError, ValueError):
    """An argument violates an operation's contract (shape, arity, range)."""


class DegenerateInputError(ContractError):
    """Input is numerically zero or otherwise degenerate."""


class PreconditionError(ContractError):
    """A mathematical precondition of the operation does not hold."""


class ConeViolation(PreconditionError):
    """An argument required to lie in a Garding cone does not.

    ``index`` is the position of the offending argument and ``level`` the
    first l with a non-positive sigma_l margin.
    """

    def __init__(self, message, index=None, level=None, margin=None):
        super().__init__(message)
        self.index = index
        self.level = level
        self.margin = margin


class AliasingError(ContractError):
    """A periodic field carries energy too close to the Nyquist frequency."""
