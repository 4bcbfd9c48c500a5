"""Fractal histopolation: self-affine densities with prescribed bin areas.

A histogram assigns a frequency to every mesh cell; the cell area is
width * frequency.  The attractor of a system contributes
scale_i * ratio_i * (total integral) + ratio_i * (shift integral)
to cell i, which turns area matching into small linear problems in whichever
parameters are left free: the scale factors, the affine shift offsets, or
the full shift maps under a continuity side condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .calculus import assemble_profile, moments
from .errors import (
    CumulativeMismatch,
    DomainMismatch,
    SingularSystem,
    ZeroTotalArea,
)
from .poly import PiecewisePolynomial
from .system import (
    DataSet,
    FractalSystem,
    Partition,
    ScaleFactors,
    build_affine_fif,
    build_alpha_fractal,
    derivative_system,
    knot_values,
)

_PIVOT_RTOL = 1e-12
_CUMULATIVE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Histogram:
    """Frequencies over the cells of a mesh; areas are width * frequency."""

    partition: Partition
    frequencies: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        if freqs.ndim != 1 or len(freqs) != self.partition.n:
            raise ValueError("need one frequency per mesh cell")
        if not np.all(np.isfinite(freqs)):
            raise ValueError("frequencies must be finite")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def targets(self) -> np.ndarray:
        return self.partition.widths * self.frequencies

    @property
    def total(self) -> float:
        return float(np.sum(self.targets))


@dataclass(frozen=True, eq=False)
class HistoSolution:
    """Outcome of an area-matching solve.

    feasible=False means the solve completed but the resulting parameters
    leave the admissible set (some |scale| >= 1); system and residuals are
    then absent.  Genuine failures (singular matrix, zero total area) raise
    instead.
    """

    feasible: bool
    system: FractalSystem | None
    targets: np.ndarray
    areas: np.ndarray | None
    area_residuals: np.ndarray | None
    diagnostics: dict = field(default_factory=dict)


def areas(sys: FractalSystem) -> np.ndarray:
    """Exact integral of the attractor over each mesh cell."""
    part = sys.partition
    total = moments(sys, 0).values[0]
    shift_ints = np.array([
        q.integral(part.lo, part.hi) for q in sys.shifts
    ])
    return sys.scales.alpha * part.ratios * total + part.ratios * shift_ints


def _solution(hist: Histogram, sys: FractalSystem, diagnostics: dict) -> HistoSolution:
    got = areas(sys)
    return HistoSolution(
        feasible=True,
        system=sys,
        targets=hist.targets,
        areas=got,
        area_residuals=got - hist.targets,
        diagnostics=diagnostics,
    )


def solve_scales(hist: Histogram, shifts: list[PiecewisePolynomial]) -> HistoSolution:
    """Given the shift maps, choose scale factors to match the cell areas.

    Summing the per-cell area identity over all cells pins the total
    integral to the histogram total, after which each scale factor is
    determined independently.  A zero histogram total leaves the total
    integral unconstrained and is rejected.
    """
    part = hist.partition
    if len(shifts) != part.n:
        raise ValueError("need one shift map per mesh cell")
    total = hist.total
    if total == 0.0:
        raise ZeroTotalArea("histogram total area is zero")
    shift_ints = np.array([q.integral(part.lo, part.hi) for q in shifts])
    alpha = (hist.targets - part.ratios * shift_ints) / (part.ratios * total)
    diagnostics = {"alpha": alpha.tolist()}
    if not np.all(np.abs(alpha) < 1.0):
        return HistoSolution(
            feasible=False, system=None, targets=hist.targets,
            areas=None, area_residuals=None, diagnostics=diagnostics,
        )
    sys = FractalSystem(part, ScaleFactors(alpha), list(shifts))
    return _solution(hist, sys, diagnostics)


def solve_offsets(hist: Histogram, scales: ScaleFactors,
                  slopes: np.ndarray) -> HistoSolution:
    """Given scale factors and shift slopes, choose the shift offsets.

    With affine shifts the per-cell area identity is linear in the offsets
    and decouples: summing over cells shows the total integral must equal
    the histogram total, and each offset then absorbs its cell's residual.
    """
    part = hist.partition
    slopes = np.asarray(slopes, dtype=float)
    if slopes.shape != (part.n,):
        raise ValueError("need one shift slope per mesh cell")
    total = hist.total
    alpha = scales.alpha
    offsets = (
        (hist.targets - part.ratios * alpha * total) / (part.ratios * part.span)
        - 0.5 * slopes * (part.hi + part.lo)
    )
    shifts = [
        PiecewisePolynomial.single([offsets[i], slopes[i]], part.lo, part.hi)
        for i in range(part.n)
    ]
    sys = FractalSystem(part, scales, shifts)
    return _solution(hist, sys, {"offsets": offsets.tolist()})


def solve_continuous(hist: Histogram, scales: ScaleFactors,
                     y0: float) -> HistoSolution:
    """Choose affine shifts jointly so the attractor is continuous.

    Unknowns are the right endpoint value and one (slope, offset) pair per
    cell.  Equations: the left endpoint equation at y0, the right endpoint
    equation, continuity at each interior knot, and one area match per cell;
    that is 2n+1 equations for 2n+1 unknowns, solved by LU with partial
    pivoting.
    """
    part = hist.partition
    n = part.n
    alpha = scales.alpha
    a = part.ratios
    lo, hi, span = part.lo, part.hi, part.span
    total = hist.total
    targets = hist.targets

    def slope_col(i: int) -> int:
        return 1 + 2 * i

    def offset_col(i: int) -> int:
        return 2 + 2 * i

    size = 2 * n + 1
    mat = np.zeros((size, size))
    rhs = np.zeros(size)
    row = 0
    # value at the left endpoint: shift_1(lo) = (1 - scale_1) * y0
    mat[row, slope_col(0)] = lo
    mat[row, offset_col(0)] = 1.0
    rhs[row] = (1.0 - alpha[0]) * y0
    row += 1
    # value at the right endpoint: shift_n(hi) = (1 - scale_n) * y_n
    mat[row, 0] = -(1.0 - alpha[n - 1])
    mat[row, slope_col(n - 1)] = hi
    mat[row, offset_col(n - 1)] = 1.0
    row += 1
    # continuity at interior knot i: the left limit from cell i equals the
    # value from cell i+1
    for i in range(n - 1):
        mat[row, 0] = alpha[i]
        mat[row, slope_col(i)] = hi
        mat[row, offset_col(i)] = 1.0
        mat[row, slope_col(i + 1)] = -lo
        mat[row, offset_col(i + 1)] = -1.0
        rhs[row] = alpha[i + 1] * y0
        row += 1
    # area match on cell i
    for i in range(n):
        mat[row, slope_col(i)] = a[i] * span * 0.5 * (hi + lo)
        mat[row, offset_col(i)] = a[i] * span
        rhs[row] = targets[i] - alpha[i] * a[i] * total
        row += 1

    scale = float(np.max(np.abs(mat)))
    lu, piv = lu_factor(mat)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or np.min(pivots) <= _PIVOT_RTOL * scale:
        raise SingularSystem(
            "continuity and area equations are numerically singular",
            condition=float(np.linalg.cond(mat)) if scale else np.inf,
        )
    sol = lu_solve((lu, piv), rhs)

    y_hi = float(sol[0])
    shifts = [
        PiecewisePolynomial.single([sol[offset_col(i)], sol[slope_col(i)]], lo, hi)
        for i in range(n)
    ]
    sys = FractalSystem(part, scales, shifts)
    diagnostics = {
        "y0": y0,
        "y_hi": y_hi,
        "condition": float(np.linalg.cond(mat)),
    }
    return _solution(hist, sys, diagnostics)


def cumulative_data(hist: Histogram, y0: float = 0.0) -> DataSet:
    """Knot data of the cumulative area function starting at y0."""
    ys = np.concatenate([[y0], y0 + np.cumsum(hist.targets)])
    return DataSet(hist.partition.knots.copy(), ys)


def histospline(spline: FractalSystem, hist: Histogram) -> HistoSolution:
    """Differentiate a self-affine spline of the cumulative areas.

    The spline must interpolate the cumulative data of the histogram at the
    knots; its derivative system then reproduces every cell area exactly,
    by the fundamental theorem applied cellwise.
    """
    part = hist.partition
    sp = spline.partition
    if len(sp.knots) != len(part.knots) or np.max(
            np.abs(sp.knots - part.knots)) > 1e-9 * part.span:
        raise DomainMismatch("spline mesh differs from the histogram mesh")
    expected = cumulative_data(hist, y0=float(knot_values(spline)[0]))
    got = knot_values(spline)
    err = float(np.max(np.abs(got - expected.ys)))
    if err > _CUMULATIVE_TOL:
        raise CumulativeMismatch(
            f"spline knot values miss the cumulative areas by {err:.3e}"
        )
    deriv = derivative_system(spline, 1)
    return _solution(hist, deriv, {"cumulative_error": err})


def histospline_from_data(hist: Histogram, scales: ScaleFactors,
                          y0: float = 0.0) -> HistoSolution:
    """Affine-shift cumulative spline route in one step.

    Builds the affine interpolant of the cumulative data (requiring
    |scale_i| < ratio_i so it is differentiable) and returns its derivative
    system.
    """
    data = cumulative_data(hist, y0)
    spline = build_affine_fif(data, scales)
    return histospline(spline, hist)


def decomposition_residuals(target: PiecewisePolynomial,
                            base: PiecewisePolynomial,
                            hist: Histogram,
                            scales: ScaleFactors) -> np.ndarray:
    """Check a target/base pair against the area decomposition conditions.

    The fractal perturbation of the target built over the base matches the
    cell areas exactly when each shift map integrates over the whole domain
    to (target_area_i - scale_i * ratio_i * total) / ratio_i.  Returns the
    per-cell gap of that condition for the induced shifts.
    """
    part = hist.partition
    sys = build_alpha_fractal(target, base, part, scales, continuous=False)
    got = np.array([q.integral(part.lo, part.hi) for q in sys.shifts])
    want = (hist.targets - scales.alpha * part.ratios * hist.total) / part.ratios
    return got - want
