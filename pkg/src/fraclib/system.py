"""Self-affine function systems on an interval mesh.

A system is a mesh x_0 < ... < x_N together with, for each subinterval, an
increasing affine map L_i onto it, a vertical scale factor with magnitude
below one, and a piecewise-polynomial shift map defined on the whole
interval.  The attractor of the induced operator is a bounded function f
satisfying

    f(L_i(x)) = scale_i * f(x) + shift_i(x)        for x in [x_0, x_N].

Knots follow the half-open convention throughout: an internal knot belongs
to the subinterval on its right, so f is right-continuous at internal knots
and the value reached from the left-adjacent map is reported separately.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadData,
    DerivativeScaleViolation,
    DomainMismatch,
    EndpointMismatch,
    NonMonotonicKnots,
    ScaleOutOfRange,
    TooFewKnots,
)
from .poly import PiecewisePolynomial

_TOL = 1e-9  # default structural tolerance

# ck_order cap for the degenerate all-zero-scale case, where every order passes.
_CK_CAP = 64


@dataclass(frozen=True, eq=False)
class Partition:
    """Interval mesh plus the affine contractions onto its subintervals.

    For subinterval i (1-based in formulas, 0-based in arrays) the map
    L_i(x) = ratios[i] * x + intercepts[i] sends [x_0, x_N] onto
    [x_{i-1}, x_i] and preserves orientation.
    """

    knots: np.ndarray
    ratios: np.ndarray = field(init=False)
    intercepts: np.ndarray = field(init=False)
    widths: np.ndarray = field(init=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 1 or len(knots) < 3:
            raise TooFewKnots("a mesh needs at least three knots")
        if not np.all(np.diff(knots) > 0):
            raise NonMonotonicKnots("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        span = knots[-1] - knots[0]
        object.__setattr__(self, "widths", np.diff(knots))
        object.__setattr__(self, "ratios", self.widths / span)
        object.__setattr__(
            self, "intercepts",
            (knots[-1] * knots[:-1] - knots[0] * knots[1:]) / span,
        )

    @property
    def n(self) -> int:
        """Number of subintervals."""
        return len(self.knots) - 1

    @property
    def lo(self) -> float:
        return float(self.knots[0])

    @property
    def hi(self) -> float:
        return float(self.knots[-1])

    @property
    def span(self) -> float:
        return float(self.knots[-1] - self.knots[0])

    def map_to(self, i: int, x):
        """L_i(x), with i in 1..n."""
        return self.ratios[i - 1] * np.asarray(x, dtype=float) + self.intercepts[i - 1]

    def map_from(self, i: int, x):
        """Inverse of L_i, with i in 1..n."""
        return (np.asarray(x, dtype=float) - self.intercepts[i - 1]) / self.ratios[i - 1]

    def locate(self, x) -> np.ndarray:
        """1-based subinterval index under the half-open convention."""
        idx = np.searchsorted(self.knots, x, side="right")
        return np.clip(idx, 1, self.n)

    def is_equidistant(self, rtol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.widths - self.widths[0])
                           <= rtol * self.span))


def make_partition(knots) -> Partition:
    """Validate knots and precompute the subinterval maps."""
    return Partition(np.asarray(knots, dtype=float))


@dataclass(frozen=True, eq=False)
class ScaleFactors:
    """Vertical scale factors, one per subinterval, each with |value| < 1."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.ndim != 1 or len(alpha) == 0:
            raise ScaleOutOfRange("scale vector must be one-dimensional and non-empty")
        if np.any(np.abs(alpha) >= 1.0) or not np.all(np.isfinite(alpha)):
            raise ScaleOutOfRange("every scale factor needs magnitude < 1")
        object.__setattr__(self, "alpha", alpha)

    @property
    def sup(self) -> float:
        """Max magnitude; the contraction factor of the function-space operator."""
        return float(np.max(np.abs(self.alpha)))

    def __len__(self):
        return len(self.alpha)


@dataclass(frozen=True, eq=False)
class DataSet:
    """Interpolation data: one ordinate per mesh knot."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise BadData("abscissae and ordinates must be 1-d arrays of equal length")
        if not np.all(np.diff(xs) > 0):
            raise BadData("data abscissae must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points) -> "DataSet":
        pts = np.asarray(points, dtype=float)
        return cls(pts[:, 0], pts[:, 1])


@dataclass(frozen=True, eq=False)
class FractalSystem:
    """A mesh, scale factors, and one shift map per subinterval."""

    partition: Partition
    scales: ScaleFactors
    shifts: list[PiecewisePolynomial]
    variant_tag: str | None = None

    def __post_init__(self):
        n = self.partition.n
        if len(self.scales) != n:
            raise DomainMismatch(f"{n} subintervals but {len(self.scales)} scales")
        if len(self.shifts) != n:
            raise DomainMismatch(f"{n} subintervals but {len(self.shifts)} shift maps")
        slack = _TOL * max(self.partition.span, 1.0)
        for j, q in enumerate(self.shifts):
            if q.lo > self.partition.lo + slack or q.hi < self.partition.hi - slack:
                raise DomainMismatch(
                    f"shift map {j + 1} does not cover the full interval"
                )

    @property
    def n(self) -> int:
        return self.partition.n


class Variant(enum.Enum):
    """Classification of a system by continuity and data fit."""

    CONTINUOUS_INTERPOLATORY = "continuous-interpolatory"
    CONTINUOUS_APPROXIMANT = "continuous-approximant"
    INTERPOLATORY_DISCONTINUOUS = "interpolatory-discontinuous"
    GENERAL_BOUNDED = "general-bounded"


@dataclass(frozen=True, eq=False)
class VariantReport:
    variant: Variant
    epsilon: float | None
    join_residuals: np.ndarray
    endpoint_residuals: np.ndarray
    ck_order: int


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _check_data_on_knots(partition: Partition, data: DataSet) -> np.ndarray:
    if len(data.xs) != partition.n + 1:
        raise BadData(f"expected {partition.n + 1} data points, got {len(data.xs)}")
    if np.max(np.abs(data.xs - partition.knots)) > _TOL * max(partition.span, 1.0):
        raise BadData("data abscissae must coincide with the mesh knots")
    return data.ys


def build_affine_fif(data: DataSet, scales: ScaleFactors) -> FractalSystem:
    """Continuous interpolant with affine shift maps through the data.

    The two endpoint conditions of each subinterval map determine the affine
    shift uniquely:
        shift_i(x_0) = y_{i-1} - scale_i * y_0
        shift_i(x_N) = y_i     - scale_i * y_N
    """
    partition = make_partition(data.xs)
    if len(scales) != partition.n:
        raise DomainMismatch("one scale factor per subinterval required")
    y = _check_data_on_knots(partition, data)
    x0, xn = partition.lo, partition.hi
    span = partition.span
    alpha = scales.alpha
    shifts = []
    for i in range(partition.n):
        c1 = (y[i + 1] - y[i]) / span - alpha[i] * (y[-1] - y[0]) / span
        c0 = (xn * y[i] - x0 * y[i + 1]) / span - alpha[i] * (xn * y[0] - x0 * y[-1]) / span
        shifts.append(PiecewisePolynomial.single([c0, c1], x0, xn))
    return FractalSystem(partition, scales, shifts,
                         variant_tag=Variant.CONTINUOUS_INTERPOLATORY.value)


def build_alpha_fractal(target: PiecewisePolynomial, base: PiecewisePolynomial,
                        partition: Partition, scales: ScaleFactors,
                        continuous: bool = True) -> FractalSystem:
    """Fractal perturbation of a target curve relative to a base curve.

    shift_i = target(L_i(.)) - scale_i * base, assembled in closed form.  With
    `continuous=True` the base must agree with the target at both interval
    endpoints, which makes the attractor a continuous deformation of the
    target that leaves its endpoint values fixed.
    """
    lo, hi = partition.lo, partition.hi
    slack = _TOL * max(partition.span, 1.0)
    for name, p in (("target", target), ("base", base)):
        if p.lo > lo + slack or p.hi < hi - slack:
            raise DomainMismatch(f"{name} must cover the full interval")
    if continuous:
        scale = max(1.0, target.sup_abs(), base.sup_abs())
        if (abs(target(lo) - base(lo)) > _TOL * scale
                or abs(target(hi) - base(hi)) > _TOL * scale):
            raise EndpointMismatch(
                "base must match the target at both endpoints for a continuous build"
            )
    shifts = []
    for i in range(1, partition.n + 1):
        composed = target.compose_affine(
            float(partition.ratios[i - 1]), float(partition.intercepts[i - 1]), lo, hi
        )
        shifts.append(composed.combine(base, 1.0, -float(scales.alpha[i - 1])))
    tag = Variant.CONTINUOUS_INTERPOLATORY.value if continuous else None
    return FractalSystem(partition, scales, shifts, variant_tag=tag)


def build_interpolatory_discontinuous(data: DataSet, scales: ScaleFactors,
                                      free_slopes) -> FractalSystem:
    """Interpolant whose affine shifts are pinned only on the left.

    Each shift satisfies shift_i(x_0) = y_{i-1} - scale_i * y_0, which forces
    interpolation at every knot under the half-open convention while leaving
    the slope of shifts 1..N-1 free.  The last slope is determined by the
    right-endpoint fixed point; a value supplied for it is ignored.
    """
    partition = make_partition(data.xs)
    if len(scales) != partition.n:
        raise DomainMismatch("one scale factor per subinterval required")
    y = _check_data_on_knots(partition, data)
    slopes = np.asarray(free_slopes, dtype=float)
    if slopes.shape != (partition.n,):
        raise DomainMismatch(f"free_slopes must have length {partition.n}")
    x0, xn = partition.lo, partition.hi
    alpha = scales.alpha
    shifts = []
    for i in range(partition.n):
        if i < partition.n - 1:
            c1 = slopes[i]
        else:
            c1 = ((y[-1] - alpha[i] * y[-1]) - (y[i] - alpha[i] * y[0])) / (xn - x0)
        c0 = (y[i] - alpha[i] * y[0]) - c1 * x0
        shifts.append(PiecewisePolynomial.single([c0, c1], x0, xn))
    return FractalSystem(partition, scales, shifts,
                         variant_tag=Variant.INTERPOLATORY_DISCONTINUOUS.value)


def derivative_system(sys: FractalSystem, order: int = 1) -> FractalSystem:
    """System whose attractor is the order-th derivative of the attractor of sys.

    Requires |scale_i| < ratio_i**order for every subinterval, otherwise the
    derivative operator does not contract.  Whether the derivative joins up
    continuously is a separate question: classify the result with validate().
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    ratios = sys.partition.ratios
    alpha = sys.scales.alpha
    powers = ratios ** order
    if np.any(np.abs(alpha) >= powers):
        bad = int(np.argmax(np.abs(alpha) >= powers)) + 1
        raise DerivativeScaleViolation(
            f"|scale_{bad}| >= ratio_{bad}**{order}; derivative system does not contract"
        )
    shifts = [q.derivative(order).scaled(1.0 / powers[i])
              for i, q in enumerate(sys.shifts)]
    return FractalSystem(sys.partition, ScaleFactors(alpha / powers), shifts)


# ---------------------------------------------------------------------------
# knot values and classification
# ---------------------------------------------------------------------------

def knot_values(sys: FractalSystem) -> np.ndarray:
    """Attractor values at the mesh knots (right-sided at internal knots).

    The two endpoints are fixed points of the first and last map, and each
    internal knot is the image of the left endpoint under its right-adjacent
    map, which closes the recursion without any iteration.
    """
    part = sys.partition
    alpha = sys.scales.alpha
    x0, xn = part.lo, part.hi
    f0 = sys.shifts[0](x0) / (1.0 - alpha[0])
    fn = sys.shifts[-1](xn) / (1.0 - alpha[-1])
    values = np.empty(part.n + 1)
    values[0] = f0
    values[-1] = fn
    for i in range(1, part.n):
        values[i] = alpha[i] * f0 + sys.shifts[i](x0)
    return values


def left_knot_values(sys: FractalSystem) -> np.ndarray:
    """Left-sided limits at knots 1..N, from the left-adjacent maps."""
    part = sys.partition
    xn = part.hi
    fn = sys.shifts[-1](xn) / (1.0 - sys.scales.alpha[-1])
    return np.array([sys.scales.alpha[i] * fn + sys.shifts[i](xn)
                     for i in range(part.n)])


def _ck_order(sys: FractalSystem) -> int:
    alpha_abs = np.abs(sys.scales.alpha)
    ratios = sys.partition.ratios
    r = 0
    while r < _CK_CAP and np.all(alpha_abs < ratios ** (r + 1)):
        r += 1
    return r


def validate(sys: FractalSystem, tol: float = _TOL,
             data: DataSet | None = None) -> VariantReport:
    """Classify a system by its join residuals and, optionally, a data fit.

    Join residual at an internal knot is |left limit - right value|.  With
    data supplied, endpoint residuals are the deviations at the first and
    last knot and epsilon is the worst deviation over all knots; without
    data a function trivially interpolates its own knot values.
    """
    values = knot_values(sys)
    lefts = left_knot_values(sys)
    join = np.abs(lefts[:-1] - values[1:-1])
    joins_ok = bool(np.all(join <= tol))

    if data is not None:
        y = _check_data_on_knots(sys.partition, data)
        dev = np.abs(values - y)
        endpoint = np.array([dev[0], dev[-1]])
        eps = float(np.max(dev))
        matches = eps <= tol
    else:
        endpoint = np.zeros(2)
        eps = 0.0
        matches = True

    if joins_ok and matches:
        variant, report_eps = Variant.CONTINUOUS_INTERPOLATORY, None
    elif joins_ok:
        variant, report_eps = Variant.CONTINUOUS_APPROXIMANT, eps
    elif matches and data is not None:
        variant, report_eps = Variant.INTERPOLATORY_DISCONTINUOUS, None
    else:
        variant, report_eps = Variant.GENERAL_BOUNDED, None

    return VariantReport(variant=variant, epsilon=report_eps,
                         join_residuals=join, endpoint_residuals=endpoint,
                         ck_order=_ck_order(sys))
