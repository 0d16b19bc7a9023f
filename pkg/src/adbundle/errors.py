"""Exception types shared across the package."""


class InfeasiblePointError(ValueError):
    """A point lies outside the domain of the simple term."""


class UnboundedDomainError(ValueError):
    """An operation requires a bounded domain but got an unbounded one."""


class DegenerateOracleError(ValueError):
    """The oracle returned a zero subgradient strictly above the optimum."""


class InvalidBoxError(ValueError):
    """A requested box does not contain the known minimizer."""


class DegenerateInstanceError(ValueError):
    """Instance generation parameters produce an empty/degenerate problem."""


class ConfigurationError(ValueError):
    """A solver or bundle configuration cannot satisfy its contract."""
