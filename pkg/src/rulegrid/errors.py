"""Exception types shared across the package."""


class InvalidCode(ValueError):
    """Entity code or its tile/color parts fall outside the legal ranges."""


class InvalidEncoding(ValueError):
    """Rule or goal encoding does not describe any known variant."""


class InvalidAction(ValueError):
    """Action id outside the discrete action space."""


class GridFull(RuntimeError):
    """Not enough free floor cells left to place the requested entities."""


class LayoutTooSmall(ValueError):
    """Grid dimensions cannot accommodate the requested room layout."""


class UnknownEnvironment(KeyError):
    """Environment name not present in the registry."""


class UnknownBenchmark(KeyError):
    """Benchmark name not present in the named-benchmark registry."""


class FormatError(ValueError):
    """Benchmark file is corrupt or has an unsupported version."""


class InvalidProportion(ValueError):
    """Split proportion outside the open interval (0, 1)."""


class ObjectPoolExhausted(RuntimeError):
    """Task sampling ran out of unused objects."""


class BudgetExceeded(RuntimeError):
    """Search aborted: the node budget ran out before an answer was found."""
