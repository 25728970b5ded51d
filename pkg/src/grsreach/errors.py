"""Exception hierarchy for grsreach."""


class GrsReachError(Exception):
    """Base class for all grsreach errors."""


class DimensionError(GrsReachError, ValueError):
    """A vector or matrix does not have the expected shape."""


class DomainExitError(GrsReachError):
    """The integrated state left the configured guard region."""

    def __init__(self, exit_time: float, state, radius: float):
        self.exit_time = exit_time
        self.state = state
        self.radius = radius
        super().__init__(
            f"state left guard ball of radius {radius:.6g} at t={exit_time:.9g}"
        )


class ProxyDomainError(GrsReachError, ValueError):
    """A proxy state lies outside B, where b - c|x| < 0."""


class DegenerateActuationError(GrsReachError, ValueError):
    """G(x0) is the zero matrix, so nothing can be steered."""


class UnreachableDirectionError(GrsReachError, ValueError):
    """A target direction has no constant proxy control reaching it."""


class InadmissibleInputError(GrsReachError, ValueError):
    """An input lies outside the admissible unit ball."""


class ParameterError(GrsReachError, ValueError):
    """Weights or parameters violate their constraints."""


class TrivialTargetError(GrsReachError, ValueError):
    """The target coincides with the start, so no direction is defined."""


class RegressedError(GrsReachError):
    """The last cycle did not bring the anchor closer than r to the waypoint."""


class ConfigError(GrsReachError):
    """A run configuration could not be loaded or validated."""
