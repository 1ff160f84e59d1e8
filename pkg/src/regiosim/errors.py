"""Exception hierarchy.

Errors fall into two families. :class:`InputError` covers anything caused by the
supplied data or configuration (the CLI maps it to exit code 2);
:class:`ComputationError` covers numerical failures on valid input (exit code 1).
"""


class RegiosimError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RegiosimError, ValueError):
    """Invalid configuration, parameters or data."""


class ComputationError(RegiosimError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


# model / dynamics
class ParameterOutOfRange(InputError):
    pass


class DivergentRegime(InputError):
    """``beta + theta + mu_i >= 1`` for at least one region."""

    def __init__(self, message, regions=()):
        super().__init__(message)
        self.regions = tuple(regions)


class DimensionMismatch(InputError):
    pass


class HeterogeneousMu(InputError):
    pass


class NonFiniteState(ComputationError):
    pass


class SingularSystem(ComputationError):
    pass


# spatial
class DuplicateRegion(InputError):
    pass


class CoordinateOutOfRange(InputError):
    pass


class ZeroDistance(InputError):
    pass


class BoundaryNotIncreasing(InputError):
    pass


class DegenerateField(InputError):
    pass


class InsufficientPermutations(InputError):
    pass


# econometrics
class RankDeficient(InputError):
    pass


class NoWithinVariation(InputError):
    pass


class IncompatibleFits(InputError):
    pass


class NonFiniteLikelihood(ComputationError):
    pass


class DidNotConverge(ComputationError):
    pass


class NotConverged(ComputationError):
    pass


# panel data
class SchemaError(InputError):
    def __init__(self, message, problems=()):
        super().__init__(message)
        self.problems = list(problems)


class UnbalancedPanel(InputError):
    pass


class NonPositive(InputError):
    pass


class NonPositiveInitialGrowth(InputError):
    pass


class ZeroResponse(InputError):
    pass


class TooFewRegions(InputError):
    pass


class ConfigError(InputError):
    pass
