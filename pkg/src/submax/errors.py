"""Exception types raised across the package."""


class SubmaxError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SubmaxError, ValueError):
    """Malformed input: bad element index, bad table length, domain violation."""


class CapacityError(SubmaxError, ValueError):
    """Instance is too large for an exhaustive routine."""


class InfeasibleError(SubmaxError):
    """The optimization problem has no feasible point."""


class UnboundedError(SubmaxError):
    """The objective is unbounded over the feasible region."""


class AdversarialTraceError(SubmaxError, AssertionError):
    """The forced tight-instance replay drifted from its predicted trajectory."""
