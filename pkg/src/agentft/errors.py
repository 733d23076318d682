"""Exception hierarchy shared by every module of the simulator."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigInvalid(SimulationError, ValueError):
    pass


# topology
class DimensionMismatch(ConfigInvalid):
    pass


class InvalidCoordinate(SimulationError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class PolicyViolation(SimulationError):
    """A send between logical nodes that are not Moore-adjacent."""


# taskgraph
class InvalidLeafCount(ConfigInvalid):
    pass


class InvalidFanIn(ConfigInvalid):
    pass


class FeedSizeMismatch(SimulationError, ValueError):
    pass


# agent protocol; these end a trial with survived=False
class TrialFailure(SimulationError):
    """Raised inside an agent protocol when the trial cannot survive."""

    reason = "TrialFailure"


class NoEscapeRoute(TrialFailure):
    reason = "NoEscapeRoute"


class SpawnFailed(TrialFailure):
    reason = "SpawnFailed"


class TransferIncomplete(TrialFailure):
    reason = "TransferIncomplete"


class AckTimeout(TrialFailure):
    reason = "AckTimeout"


class UnknownDependency(SimulationError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ProtocolError(SimulationError):
    """An agent operation was invoked from the wrong phase."""


# metrics / report
class MetricsError(SimulationError, ValueError):
    pass


class UnknownNode(MetricsError):
    pass


class IncompleteRow(MetricsError):
    pass


class MissingNodeMean(MetricsError):
    pass


class MissingEntries(MetricsError):
    pass


class ParseError(MetricsError):
    pass


class IncompleteData(MetricsError):
    pass
