"""Exception hierarchy shared by every module of the package."""


class WalkEstimateError(Exception):
    """Base class for all errors raised by :mod:`walkestimate`."""


class InvalidParameter(WalkEstimateError, ValueError):
    pass


class InvalidNode(WalkEstimateError, KeyError):
    pass


class BudgetExhausted(WalkEstimateError):
    """The query ledger would exceed its unique-node budget.

    Samplers catch this to terminate an experiment and report partial output.
    """


class DeadEnd(WalkEstimateError):
    """A walk reached a node without neighbours."""


class NotIrreducible(WalkEstimateError):
    pass


class DegenerateTarget(WalkEstimateError):
    pass


class NoConvergence(WalkEstimateError):
    pass


class DomainError(WalkEstimateError, ValueError):
    pass


class DegenerateChain(WalkEstimateError):
    pass


class ParseError(WalkEstimateError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ConfigError(WalkEstimateError, ValueError):
    def __init__(self, message, path=()):
        where = "/".join(str(p) for p in path)
        super().__init__("%s: %s" % (where or "<root>", message))
        self.path = tuple(path)
