"""Exception types raised across linhyp.

Every error derives from LinhypError so callers (and the CLI) can map
input problems to a single exit code.
"""


class LinhypError(Exception):
    """Base class for all library errors."""


class InputError(LinhypError, ValueError):
    """Invalid input that the caller could fix."""


class WrongEdgeSize(InputError):
    pass


class VertexOutOfRange(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class LoadError(InputError):
    pass


class RegimeMismatch(InputError):
    pass


class BadSetSize(InputError):
    pass


class TooFewVertices(InputError):
    pass


class OutOfRange(InputError):
    pass


class NotLinearK(InputError):
    pass


class NegativeT(InputError):
    pass


class PreconditionFailed(InputError):
    pass


class NoSuchCluster(InputError):
    pass


class TooFewFreeEdges(InputError):
    pass


class StaleDescriptor(InputError):
    pass


class EdgeAbsent(InputError):
    pass


class EdgePresent(InputError):
    pass


class ZeroTrials(InputError):
    pass


class AcceptanceTooLow(InputError):
    pass


class BudgetExceeded(LinhypError):
    """A configured work cap would be exceeded; nothing is approximated."""
