"""Exception hierarchy shared by the library and the command line."""


class SimmapError(Exception):
    """Base class for every error raised by simmap."""


class DataError(SimmapError, ValueError):
    """Input data is malformed or violates a precondition of an engine."""


class ConfigError(SimmapError, ValueError):
    """Invalid run configuration or rendering option."""


class NumericalError(SimmapError, ArithmeticError):
    """An optimizer produced non-finite values or an unbounded objective."""
