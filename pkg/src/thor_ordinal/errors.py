"""Exception hierarchy.

Everything a caller can fix by changing inputs derives from ``OrdinalError``
(a ``ValueError``); numerical blow-ups during training raise ``NumericFault``.
"""


class OrdinalError(ValueError):
    """Base class for user/config errors."""


class InvalidClassCount(OrdinalError):
    pass


class InvalidLabel(OrdinalError):
    pass


class InvalidPair(OrdinalError):
    pass


class ShapeError(OrdinalError):
    pass


class InvalidArchitecture(OrdinalError):
    pass


class UncoverableClass(OrdinalError):
    """A class has no examples where at least one is required."""

    def __init__(self, missing, where="dataset"):
        self.missing = sorted(int(m) for m in missing)
        super().__init__(f"class(es) {self.missing} have no examples in {where}")


class InfeasibleMargin(OrdinalError):
    pass


class ConfigError(OrdinalError):
    pass


class CsvParseError(OrdinalError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class StaleTape(OrdinalError):
    pass


class EmptyInput(OrdinalError):
    pass


class NumericFault(ArithmeticError):
    """Non-finite values reached the optimizer."""
