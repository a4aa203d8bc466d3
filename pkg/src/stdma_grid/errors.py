"""Exception hierarchy shared by all modules."""


class StdmaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(StdmaError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConflictError(StdmaError):
    """Two relaying nodes share a slot."""


class PathError(StdmaError):
    """A node sequence is not a valid path in the network."""


class UnreachableError(StdmaError):
    """No path exists between the requested endpoints."""


class RoutingError(StdmaError):
    """A forwarding procedure stopped before reaching its destination.

    ``partial`` holds the nodes visited so far.
    """

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = tuple(partial)


class LocalMinimumError(RoutingError):
    """Greedy forwarding found no neighbor with positive progress."""


class CoverageError(StdmaError):
    """A node is not covered by any dominating tree."""


class BoundExhaustedError(StdmaError):
    """A bounded search finished without finding an admissible answer."""


class InfeasibleError(StdmaError):
    """No candidate satisfies the feasibility requirement."""


class DivergentSumError(StdmaError, ValueError):
    """An infinite interference series does not converge."""


class ConstructionError(StdmaError):
    """A structural construction (highway, tree) cannot satisfy its constraints."""


class IngestionError(StdmaError, ValueError):
    """Input data for the cell grid front end is unusable."""


class ConfigError(StdmaError, ValueError):
    """An experiment configuration failed validation."""
