"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit status without a lookup table.
"""


class LeastCoreError(Exception):
    exit_code = 3


class ConfigError(LeastCoreError):
    """Bad parameters or inputs supplied by the caller."""

    exit_code = 2


class NumericError(LeastCoreError):
    exit_code = 3


class BudgetExhausted(LeastCoreError):
    exit_code = 4


class NonPositiveGrandValue(NumericError):
    pass


class EmptyCoalition(ConfigError):
    pass


class EmptySample(ConfigError):
    pass


class EmptyBatch(ConfigError):
    pass


class TooManyPlayers(ConfigError):
    pass


class NonFiniteInput(NumericError):
    pass


class InvalidDistributionParams(ConfigError):
    pass


class InvalidGraphParams(ConfigError):
    pass


class ResampleLimitExceeded(NumericError):
    pass


class NumericalBreakdown(NumericError):
    pass


class CycleLimitExceeded(NumericError):
    pass


class InvalidPermutation(ConfigError):
    pass


class BudgetTooSmall(ConfigError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class MissingTargetColumn(ConfigError):
    pass


class NonNumericCell(ParseError):
    pass


class DisconnectedComparisonGraph(NumericError):
    pass
