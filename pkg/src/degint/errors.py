"""Exception types raised by the library."""


class DegintError(Exception):
    """Base class for all library errors."""


class NonFiniteMatrixError(DegintError):
    """A matrix contains NaN or Inf entries."""


class MatrixOverflowError(DegintError):
    """The matrix exponential overflowed; the input norm is too extreme."""


class FactorizationNotDefined(DegintError):
    """A pivot minor vanished; the point is off the factorizable open subset."""


class NearDegenerateSpectrum(DegintError):
    """Eigenvalue gap below threshold; spectral data would be unreliable."""


class SingularChartPoint(DegintError):
    """The point sits on the singular locus of the chart (zero coordinate,
    coincident positions, collision radius)."""


class DimensionMismatch(DegintError):
    """A point or gradient does not match the chart dimension."""


class FormulaMismatchError(DegintError):
    """No closed-form candidate reproduces the oracle solution."""


class ConsistencyError(DegintError):
    """Two independently computed routes to the same quantity disagree."""


class ReductionFailedError(DegintError):
    """Rank-1 reduction produced a moment value outside the target class."""
