"""Exception hierarchy for the aggtree package."""


class AggTreeError(Exception):
    """Base class for all aggtree errors."""


# -- topology construction and queries ---------------------------------------

class TopologyError(AggTreeError):
    """Invalid tree structure or malformed topology input."""


class CycleDetected(TopologyError):
    pass


class DisconnectedNode(TopologyError):
    pass


class DuplicateParent(TopologyError):
    pass


class NonPositiveRate(TopologyError):
    pass


class UnknownRoot(TopologyError):
    pass


class OutOfRangeDistance(TopologyError):
    pass


# -- reduce simulation --------------------------------------------------------

class SimulationError(AggTreeError):
    pass


class BlueNotAvailable(SimulationError):
    """A placement contains a switch outside the available set."""


class PayloadCountMismatch(SimulationError):
    """Payload model does not provide one payload per server slot."""


# -- solver -------------------------------------------------------------------

class SolverError(AggTreeError):
    pass


class BudgetNegative(SolverError):
    pass


class TableMismatch(SolverError):
    """Traceback invoked with tables built for a different budget or tree."""


# -- baseline strategies ------------------------------------------------------

class StrategyError(AggTreeError):
    pass


class NotCompleteBinary(StrategyError):
    pass


class InstanceTooLarge(StrategyError):
    """Brute-force enumeration would exceed the subset guard."""


# -- scenario generation ------------------------------------------------------

class ScenarioError(AggTreeError):
    pass


class BadSize(ScenarioError):
    pass


class BadParams(ScenarioError):
    pass
