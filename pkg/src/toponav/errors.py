"""Exception types raised across the navigation engine."""


class ToponavError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(ToponavError, ValueError):
    """An argument violates a documented precondition."""


class InconsistentInputError(ToponavError, ValueError):
    """Input records contradict each other (e.g. one waypoint id, two positions)."""


class UnknownNodeError(ToponavError):
    """A node id is not present in the graph."""


class NoPathError(ToponavError):
    """Start and goal lie in different connected components."""


class NoCandidatesError(ToponavError):
    """Ranking was asked to choose from an empty hypothesis set."""


class FileFormatError(ToponavError, ValueError):
    """A persisted file could not be parsed; the message carries line/field context."""


class ReferentialIntegrityError(ToponavError, ValueError):
    """A record references an entity that does not exist (names the offending record)."""


class WorldGenerationError(ToponavError, ValueError):
    """Synthetic world parameters are infeasible."""


class ProviderError(ToponavError):
    """Base class for model-provider failures."""


class TransportError(ProviderError):
    """The provider endpoint stayed unreachable or kept failing after all retries."""


class ProviderFormatError(ProviderError):
    """The provider answered, but not in the documented response contract."""
