"""
Exception hierarchy shared by every package. The CLI maps the three
top-level categories onto exit codes (see :mod:`discharge_scenarios.cli`).
"""

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


class DischargeScenariosError(Exception):
    pass


class ConfigError(DischargeScenariosError):
    """Invalid configuration or precondition violation on user input."""


class DataError(DischargeScenariosError):
    """Input data is missing, malformed or inconsistent."""


class NumericFault(DischargeScenariosError):
    """A computation produced NaN/Inf or otherwise left its valid domain."""


class ParseError(DataError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f", line {line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ShapeMismatch(DataError):
    pass


class AlignmentError(DataError):
    pass


class DomainError(ValueError, DataError):
    pass


class ForwardBackwardMismatch(ConfigError):
    """A recorded forward pass does not match the configuration of backward."""


class CheckpointError(DataError):
    pass


class TrainingDiverged(NumericFault):
    def __init__(self, message, epoch=None, parameter=None):
        self.epoch = epoch
        self.parameter = parameter
        super().__init__(message)
