"""Exception hierarchy."""


class EntropyBoundsError(Exception):
    """Base class for all errors raised by this package."""


class IncompleteAssignment(EntropyBoundsError, KeyError):
    pass


class InvalidSelection(EntropyBoundsError, ValueError):
    pass


class CapabilityMissing(EntropyBoundsError, NotImplementedError):
    pass


class NonRealVariables(EntropyBoundsError, TypeError):
    pass


class InsufficientTrainingData(EntropyBoundsError, ValueError):
    pass


class AllWeightsZero(EntropyBoundsError, FloatingPointError):
    pass


class ZeroDensityConditioningPoint(EntropyBoundsError, ValueError):
    pass


class ParticleCollapse(EntropyBoundsError, FloatingPointError):
    pass


class BackwardKernelUnavailable(EntropyBoundsError, NotImplementedError):
    pass


class InvalidSMCConfig(EntropyBoundsError, ValueError):
    pass


class NonpositiveStddev(EntropyBoundsError, ValueError):
    pass


class TooLargeToEnumerate(EntropyBoundsError, ValueError):
    pass


class SingularSubmatrix(EntropyBoundsError, ValueError):
    pass


class IndexOutOfHorizon(EntropyBoundsError, IndexError):
    pass


class DegenerateSample(EntropyBoundsError, ValueError):
    pass


class SharingModeMismatch(EntropyBoundsError, ValueError):
    pass


class ModelLoadError(EntropyBoundsError, ValueError):
    pass


class ConfigError(EntropyBoundsError, ValueError):
    pass
