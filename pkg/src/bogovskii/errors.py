"""Exception types raised across the package."""


class BogovskiiError(Exception):
    """Base class for all package errors."""


class BasePointOutside(BogovskiiError):
    pass


class RootNotCovered(BogovskiiError):
    pass


class DisconnectedComplex(BogovskiiError):
    pass


class OutsideDecomposition(BogovskiiError):
    pass


class DegeneratePath(BogovskiiError):
    pass


class AtomCoincidence(BogovskiiError):
    pass


class ZeroSumViolated(BogovskiiError):
    pass


class DominationViolated(BogovskiiError):
    pass


class DiagonalEvaluation(BogovskiiError):
    pass


class SkinViolation(BogovskiiError):
    pass


class DegenerateRHS(BogovskiiError):
    pass


class EmptyZeroSet(BogovskiiError):
    pass


class ConfigError(BogovskiiError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.path = path
