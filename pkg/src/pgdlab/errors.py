"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all pgdlab errors."""


class ConfigError(ToolkitError):
    """Invalid configuration: step size, bounds, empty sets, malformed options."""


class FeasibilityError(ToolkitError):
    """A point violates a feasibility precondition (not in the set, infinite penalty)."""


class CapabilityError(ToolkitError):
    """The requested oracle is not available for this set or operator."""


class NumericError(ToolkitError):
    """Divergence, non-finite values, or iteration failure."""


class EvaluationError(NumericError):
    """A function evaluation produced a non-finite value."""
