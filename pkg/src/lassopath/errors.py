"""Exception hierarchy shared by all modules.

Every exception carries the process exit code the CLI maps it to:
1 for bad input, 2 for rank or degeneracy problems, 3 for stalled paths.
"""


class LassoPathError(Exception):
    exit_code = 1


class InputError(LassoPathError, ValueError):
    exit_code = 1


class DimensionMismatch(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class EmptyPath(InputError):
    pass


class EmptyDomain(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class NotApplicable(LassoPathError):
    """A theorem check whose hypotheses do not hold for the given data."""

    exit_code = 1


class DegeneracyError(LassoPathError):
    exit_code = 2


class AllZeroObservations(DegeneracyError):
    pass


class RankDeficient(DegeneracyError):
    pass


class NotActive(DegeneracyError, KeyError):
    pass


class ZeroVector(DegeneracyError):
    pass


class ZeroResidual(DegeneracyError):
    pass


class NotPositiveDefinite(DegeneracyError):
    pass


class ContractViolation(DegeneracyError):
    pass


class NoConvergence(DegeneracyError):
    pass


class StationaryStall(LassoPathError):
    exit_code = 3
