"""
Exception classes. Each one carries the exit code the CLI returns for it.
"""


class TcslError(Exception):
    exit_code = 1


class ConfigError(TcslError):
    exit_code = 2


class ParameterError(ConfigError):
    pass


class ScenarioError(ConfigError):
    pass


class GridError(ConfigError):
    pass


class ComparisonError(ConfigError):
    pass


class ContainmentError(ConfigError):
    pass


class ValidationError(TcslError):
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(TcslError):
    exit_code = 4


class DivergenceError(NumericalError):
    def __init__(self, message, last_good_time=None):
        super().__init__(f"{message} (last good t={last_good_time})")
        self.last_good_time = last_good_time


class SingularityError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class DegenerateInputError(NumericalError):
    pass
