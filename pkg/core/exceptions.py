"""
Exception hierarchy shared by the library and the CLI
"""
from typing import Optional


class DaernnError(Exception):
    """Base class for all toolkit errors"""


class DomainError(DaernnError, ValueError):
    """An input lies outside the domain of an operation"""


class ConfigError(DaernnError):
    """Invalid run configuration"""


class SchemaError(DaernnError):
    """A CSV file does not have the expected layout"""

    def __init__(self, message: str, column: Optional[str] = None):
        super().__init__(message)
        self.column = column

    def __reduce__(self):
        return type(self), (self.args[0], self.column)


class NumericalError(DaernnError):
    """A numerical procedure failed"""


class TrainingDivergenceError(NumericalError):
    """Training loss became non-finite"""

    def __init__(self, epoch: int, iteration: Optional[int] = None, level: Optional[int] = None):
        self.epoch = epoch
        self.iteration = iteration
        self.level = level
        where = f"epoch {epoch}"
        if iteration is not None:
            where = f"iteration {iteration}, level {level}, {where}"
        super().__init__(f"Training diverged at {where}")

    def with_context(self, iteration: int, level: int) -> "TrainingDivergenceError":
        return TrainingDivergenceError(self.epoch, iteration=iteration, level=level)

    def __reduce__(self):
        return type(self), (self.epoch, self.iteration, self.level)


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap"""

    def __init__(self, message: str, last_delta: float):
        super().__init__(f"{message} (last max |delta beta| = {last_delta:.3e})")
        self.last_delta = last_delta
        self.message = message

    def __reduce__(self):
        return type(self), (self.message, self.last_delta)


class InitializationError(NumericalError):
    """No uncensored observations to initialize from"""

    def __init__(self, message: str = "initialization impossible: no uncensored observations"):
        super().__init__(message)
