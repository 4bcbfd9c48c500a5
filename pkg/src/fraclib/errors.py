"""Exception hierarchy for fraclib.

Every error raised on purpose by the library derives from FraclibError so
callers (and the CLI) can separate our diagnostics from genuine bugs.
"""


class FraclibError(Exception):
    """Base class for all fraclib errors."""


# --- input / schema problems -------------------------------------------------

class SchemaError(FraclibError):
    """A JSON document does not match the expected wire format."""


class NonMonotonicKnots(FraclibError):
    """Knot abscissae are not strictly increasing."""


class TooFewKnots(FraclibError):
    """A mesh needs at least three knots (two subintervals)."""


class ScaleOutOfRange(FraclibError):
    """A vertical scale factor has magnitude >= 1."""


class BadData(FraclibError):
    """Interpolation data do not sit on the mesh knots."""


class DomainMismatch(FraclibError):
    """A piecewise polynomial does not cover the required interval."""


class EndpointMismatch(FraclibError):
    """Base curve and target disagree at the interval endpoints."""


class OutOfDomain(FraclibError):
    """Evaluation point lies outside the interval of definition."""


# --- resource / numerical-domain problems ------------------------------------

class DepthTooLarge(FraclibError):
    """The requested address depth would exceed the row budget."""


class GridMismatch(FraclibError):
    """Candidate samples do not line up with an address-aligned grid."""


class DerivativeScaleViolation(FraclibError):
    """|scale_i| >= ratio_i**r, so the derivative system does not contract."""


class SeriesNotApplicable(FraclibError):
    """The transform series needs an equidistant mesh and a Fourier kernel."""


class StieltjesPole(FraclibError):
    """Stieltjes argument falls inside the interval of integration."""


# --- solver outcomes ----------------------------------------------------------

class ZeroTotalArea(FraclibError):
    """Histogram has zero total area; scale solve is undefined."""


class SingularSystem(FraclibError):
    """Dense solve hit a pivot below tolerance; condition estimate attached."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class CumulativeMismatch(FraclibError):
    """Spline system does not interpolate the cumulative histogram data."""
