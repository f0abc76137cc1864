"""Exception hierarchy."""


class EntlabError(Exception):
    """Base class for every error raised by the laboratory."""


class InvalidStateError(EntlabError):
    """A state, measurement family or unitary violates its invariants."""


class DimensionMismatchError(EntlabError):
    """Operands have incompatible dimensions."""


class BudgetExceededError(EntlabError):
    """An exhaustive enumeration or simulation exceeds the desk-scale limits."""


class PlantingInfeasibleError(EntlabError):
    """Rejection sampling could not produce a promise instance."""


class ProtocolError(EntlabError):
    """Malformed protocol description."""


class ConfigError(EntlabError):
    """Malformed or unknown configuration."""


class UnknownSubcommandError(EntlabError):
    """The requested experiment does not exist."""
