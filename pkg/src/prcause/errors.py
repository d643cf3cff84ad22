"""Exception types shared across the package."""


class PrcauseError(Exception):
    """Base class for all package-specific errors."""


class ModelError(PrcauseError):
    """Malformed or inconsistent model input (syntax, stochasticity,
    duplicate names, unknown references, unreachable states)."""


class ContractError(PrcauseError):
    """A documented precondition of an operation was violated."""


class UndecidedError(PrcauseError):
    """The decision procedure exhausted its configured budget without
    reaching a verdict.  Never raised in place of a wrong answer."""
