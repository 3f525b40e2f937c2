"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid parameters, field geometry or config file contents."""


class EmptyDeploymentError(ConfigurationError):
    pass


class GeometryError(ConfigurationError):
    pass


class DomainError(ValueError):
    """Argument outside the mathematical domain of a model function."""


class NotACandidateError(ValueError):
    pass


class InternalInvariantError(RuntimeError):
    pass


class SimulationComplete(Exception):
    """Raised by run_round when no node is left alive."""
