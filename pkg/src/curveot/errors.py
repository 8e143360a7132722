"""Exception hierarchy shared across the package."""


class CurveOTError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptyCurve(CurveOTError):
    """Curve has fewer than two points."""


class NonFiniteCoordinate(CurveOTError):
    """A coordinate is NaN or infinite; carries the 1-based point index."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"non-finite coordinate at point {index}")


class DegenerateHalf(CurveOTError):
    """External-half extraction would leave a single point."""


class ZeroLengthCurve(CurveOTError):
    """Polyline has zero total arc length."""


class NegativeCoordinateForScheme(CurveOTError):
    """Coordinate-driven weight scheme applied to negative coordinates."""


class DegenerateDenominator(CurveOTError):
    """Weight normalization denominator is zero."""


class UnresolvableSupport(CurveOTError):
    """Support window resolves to fewer than two points or invalid bounds."""


class DimensionMismatch(CurveOTError):
    """Array shapes disagree with the problem dimensions."""


class UnbalancedMarginals(CurveOTError):
    """Marginal totals violate the balanced-problem precondition."""


class NegativePenalty(CurveOTError):
    """Penalty vectors must be elementwise nonnegative."""


class InfeasiblePenalties(CurveOTError):
    """No strictly separating penalties exist (zero cost outside the active set)."""


class TooLargeForOracle(CurveOTError):
    """Instance exceeds the reference solver's size cap."""


class SolverStall(CurveOTError):
    """Pivoting failed to terminate within the iteration cap."""


class ManifestParse(CurveOTError):
    """Dataset manifest is malformed."""


class MissingFile(CurveOTError):
    """A file referenced by a manifest does not exist."""


class MatrixParse(CurveOTError):
    """Distance-matrix file is malformed; message carries row/column location."""


class SymmetryViolation(CurveOTError):
    """Loaded distance matrix is not symmetric."""


class ConfigError(CurveOTError):
    """Pipeline configuration is invalid or has unknown fields."""


class PairComputationError(CurveOTError):
    """A pairwise distance computation failed; carries the pair ids."""

    def __init__(self, id_a: str, id_b: str, cause: Exception):
        self.id_a = id_a
        self.id_b = id_b
        self.cause = cause
        super().__init__(f"pair ({id_a}, {id_b}): {cause}")
