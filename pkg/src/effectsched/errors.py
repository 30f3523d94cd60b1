class SchedulingError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SchedulingError):
    """Malformed configuration document (unknown field, wrong type/shape)."""


class ValidationError(SchedulingError):
    """A configuration value violates a model invariant."""


class ContractError(SchedulingError):
    """An operation was called outside its stated preconditions."""


class CapacityError(SchedulingError):
    """The enumerated state space exceeds the supported size."""


class ConvergenceError(SchedulingError):
    """An iterative computation hit its iteration cap before converging."""


class InfeasibleError(SchedulingError):
    """No Lagrange multiplier brings the policy within the cost budget."""
