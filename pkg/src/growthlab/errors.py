"""Exception types shared across the package."""


class GrowthLabError(Exception):
    """Base class for all library errors."""


class SupportTooLarge(GrowthLabError):
    pass


class OverlappingSupports(GrowthLabError):
    pass


class MonotonicityViolation(GrowthLabError):
    pass


class InsufficientPrefix(GrowthLabError):
    """A finite prefix does not carry the datum an operation needs."""


class EmptyCore(GrowthLabError):
    pass


class HeightTooLarge(GrowthLabError):
    pass


class MalformedConjunct(GrowthLabError):
    pass


class ClassMismatch(GrowthLabError):
    pass


class SequenceTooLong(GrowthLabError):
    pass


class EmptyFamily(GrowthLabError):
    pass


class DepthGuard(GrowthLabError):
    pass


class HypothesisFailed(GrowthLabError):
    pass


class InvalidSlalom(GrowthLabError, ValueError):
    pass


class ScenarioError(GrowthLabError, ValueError):
    pass
