"""
Exception hierarchy for the forecasting toolkit
Each family carries the process exit code the CLI reports for it
"""

from typing import List, Optional

from config import EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE


class ForecastError(Exception):
    """Base class for every error raised by the toolkit"""

    exit_code = EXIT_NUMERICAL


class ConfigError(ForecastError):
    """Run-config or command-line problems; lists every offending key"""

    exit_code = EXIT_USAGE

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(ForecastError, ValueError):
    exit_code = EXIT_DATA


class SplitTooLarge(DataError):
    pass


class DegenerateRange(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ZeroTarget(DataError):
    pass


class ConstantActual(DataError):
    pass


class ConstantSeries(DataError):
    pass


class EmptyInput(DataError):
    pass


class NotEnoughNeighbors(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class EmptySequence(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NumericalError(ForecastError, ArithmeticError):
    exit_code = EXIT_NUMERICAL


class NumericalFailure(NumericalError):
    pass


class NonFinite(NumericalError):
    def __init__(self, message: str, epoch: Optional[int] = None):
        self.epoch = epoch
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
