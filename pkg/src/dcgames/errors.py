"""Exception hierarchy shared by every module."""


class DCGamesError(Exception):
    """Base class for all library errors."""


class InputError(DCGamesError, ValueError):
    """Malformed or out-of-range input."""


class SolverError(DCGamesError, RuntimeError):
    """An iterative solver hit its iteration cap or otherwise failed."""


class NumericError(SolverError):
    """Non-finite values appeared where finite ones are required."""


class ResourceError(DCGamesError, RuntimeError):
    """A combinatorial enumeration would exceed its configured cap."""


class UnsupportedRepresentation(DCGamesError, ValueError):
    """The requested explicit construction has no finite cell form here."""


class PreconditionError(DCGamesError, ValueError):
    """Inputs are well formed but violate an operation's precondition."""


class SynthesisError(DCGamesError, RuntimeError):
    """A synthesized portfolio fell outside its channel cone."""

    def __init__(self, message, *, message_index=None, prefix=None):
        super().__init__(message)
        self.message_index = message_index
        self.prefix = prefix


class DualityViolation(DCGamesError, RuntimeError):
    """No response symbol satisfies the dual-cone inequality."""

    def __init__(self, message, *, message_index=None, prefix=None):
        super().__init__(message)
        self.message_index = message_index
        self.prefix = prefix
