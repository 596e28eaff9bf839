"""Exception hierarchy shared by every anoscope module."""

from typing import Optional


class AnoscopeError(Exception):
    """Base class for all anoscope errors."""


# core


class UnsupportedCombination(AnoscopeError, ValueError):
    def __init__(self, dimension: str, message: str):
        self.dimension = dimension
        super().__init__(f"Unsupported {dimension}: {message}")


class EmptyScores(AnoscopeError, ValueError):
    pass


class AlphaOutOfRange(AnoscopeError, ValueError):
    pass


class ModelHasNoIntrinsicBoundary(AnoscopeError, TypeError):
    pass


class InvalidDataset(AnoscopeError, ValueError):
    pass


class DimensionMismatch(AnoscopeError, ValueError):
    pass


# data


class InvalidConfig(AnoscopeError, ValueError):
    pass


class DegenerateBox(AnoscopeError, ValueError):
    pass


class EmptyTrainingSet(AnoscopeError, ValueError):
    pass


class FractionsInvalid(AnoscopeError, ValueError):
    pass


class ParseError(AnoscopeError, ValueError):
    def __init__(self, row: int, col: int, message: str):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}")


class MissingFile(AnoscopeError, FileNotFoundError):
    pass


# probabilistic models


class TooFewSamples(AnoscopeError, ValueError):
    pass


class SingularCovariance(AnoscopeError, RuntimeError):
    pass


class DegenerateComponent(AnoscopeError, RuntimeError):
    pass


class NonPositiveGamma(AnoscopeError, ValueError):
    pass


class RankDeficient(AnoscopeError, RuntimeError):
    pass


# one-class


class SingularSubset(AnoscopeError, RuntimeError):
    pass


class SolverNotConverged(AnoscopeError, RuntimeError):
    def __init__(self, iterations: int, violation: float):
        self.iterations = iterations
        self.violation = violation
        super().__init__(
            f"dual solver stopped after {iterations} iterations with KKT violation {violation:.3e}"
        )


class InvalidNu(AnoscopeError, ValueError):
    pass


class UnlabeledInput(AnoscopeError, ValueError):
    pass


class NoLabeledValidation(AnoscopeError, ValueError):
    pass


# reconstruction


class NonPSDKernelMatrix(AnoscopeError, RuntimeError):
    pass


class EmptyCluster(AnoscopeError, RuntimeError):
    pass


# deep models


class Diverged(AnoscopeError, RuntimeError):
    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")


class CollapseDetected(AnoscopeError, RuntimeError):
    def __init__(self, epoch: int, variance: float, initial_variance: float):
        self.epoch = epoch
        self.variance = variance
        self.initial_variance = initial_variance
        super().__init__(
            f"feature map collapse at epoch {epoch}: embedding variance {variance:.3e} "
            f"fell below the guard (initial variance {initial_variance:.3e})"
        )


class BiasTermsForbidden(AnoscopeError, ValueError):
    pass


# explain


class NonPSDMatrix(AnoscopeError, ValueError):
    pass


class ZeroHeatmap(AnoscopeError, ValueError):
    pass


# evaluation


class SingleClass(AnoscopeError, ValueError):
    pass


class NoAnomalies(AnoscopeError, ValueError):
    pass


class KOutOfRange(AnoscopeError, ValueError):
    pass


# cli


class ConfigError(AnoscopeError, ValueError):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)
