"""Exception hierarchy shared by every module."""


class ChshError(ValueError):
    """Base class for all errors raised by chshblocks."""


class ShapeError(ChshError):
    pass


class SizeError(ChshError):
    pass


class SymmetryError(ChshError):
    pass


class WindowError(ChshError):
    """A 2-level window does not fit the space, or an operator leaks out of it."""


class OrderingError(ChshError):
    pass


class DegenerateStateError(ChshError):
    pass


class LevelIndexError(ChshError, IndexError):
    pass


class ProbabilityError(ChshError):
    pass


class NormError(ChshError):
    pass


class AbsentBlockError(ChshError):
    pass


class ArityError(ChshError):
    pass


class StateInvariantError(ChshError):
    """A loaded or constructed state violates positivity, trace, or normalization."""


class FormatError(ChshError):
    """Malformed serialized input."""
