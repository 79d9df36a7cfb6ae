"""Exception hierarchy shared by the library and the CLI."""


class RankGossipError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(RankGossipError, ValueError):
    """A caller supplied an out-of-range or inconsistent parameter."""


class InvalidInput(RankGossipError, ValueError):
    """Input data violates an assumption of the requested method (e.g. ties)."""


class GenerationFailure(RankGossipError, RuntimeError):
    """A random graph generator exhausted its retry budget."""


class EstimatorFailure(RankGossipError, RuntimeError):
    """An estimator produced a non-finite value during simulation.

    Attributes:
        node: index of the offending node, when known.
        tick: simulation tick at which the failure surfaced, when known.
    """

    def __init__(self, message, node=None, tick=None):
        super().__init__(message)
        self.node = node
        self.tick = tick
