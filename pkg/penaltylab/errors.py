"""
Error types for penaltylab
Every failure an operation can report has its own class under PenaltyLabError
"""


class PenaltyLabError(Exception):
    """Base class for all penaltylab errors"""


class ArgumentError(PenaltyLabError, ValueError):
    """An argument value is outside what the operation accepts"""


class DimensionError(PenaltyLabError, ValueError):
    """An assignment length does not match its model or instance"""


class SpinDomainError(PenaltyLabError, ValueError):
    """A spin vector holds something other than -1/+1"""


class ConstructionError(PenaltyLabError):
    """An instance cannot be built from the given base data"""


class MissingStateError(PenaltyLabError):
    """A known optimum or ground energy needed by the operation is absent"""


class ResourceLimitError(PenaltyLabError):
    """The requested enumeration exceeds the configured cap"""


class UndefinedValueError(PenaltyLabError):
    """A derived quantity does not exist for this input (e.g. constant spectrum)"""


class FitError(PenaltyLabError):
    """Not enough usable points to fit"""


class ConfigError(PenaltyLabError, ValueError):
    """An instance file, model file or sweep spec cannot be used"""
