"""Moment and integral-transform calculus for self-affine systems.

Two independent routes to every integral are kept side by side:

* closed-form recursions pulled out of the self-referential equation
  (moments, transform functional equations, the Fourier series), and
* a panel quadrature that only ever touches certified point evaluations.

The quadrature is the oracle for the recursions and is deliberately never
expressed through them: it pushes exact midpoint samples through the maps
and sums panel contributions, so its error contracts geometrically with
depth but it shares no algebra with the closed forms it checks.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad as _scipy_quad

from .errors import DepthTooLarge, SeriesNotApplicable, StieltjesPole
from .evaluate import eval_at, row_cap
from .poly import PiecewisePolynomial, stitch
from .system import FractalSystem

# Moment recursion cap; powers of knot magnitudes stay within float range here.
MAX_MOMENT = 32

# Each depth-k panel is integrated on its own midpoint sub-refinement.  The
# refinement is fixed so the quadrature error keeps contracting with k, and
# it shrinks automatically when the cell count would exceed the budget.
_PANEL_REFINE = 6
_CELL_BUDGET = 2 ** 23


class TransformKind(enum.Enum):
    LAPLACE = "laplace"
    STIELTJES = "stieltjes"
    FOURIER = "fourier"


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Power moments of the attractor and of its profile, orders 0..m_max."""

    values: np.ndarray
    q_moments: np.ndarray
    method: str

    @property
    def m_max(self) -> int:
        return len(self.values) - 1


def assemble_profile(sys: FractalSystem) -> PiecewisePolynomial:
    """The inhomogeneous part of f as a function of position.

    On subinterval i the self-referential equation reads
    f(x) = scale_i * f(L_i^{-1}(x)) + shift_i(L_i^{-1}(x)), and the profile
    is that last term: shift_i pulled forward onto its own subinterval.
    """
    part = sys.partition
    parts = []
    for i in range(part.n):
        ratio = 1.0 / float(part.ratios[i])
        shift = -float(part.intercepts[i]) / float(part.ratios[i])
        parts.append(sys.shifts[i].compose_affine(
            ratio, shift, float(part.knots[i]), float(part.knots[i + 1])
        ))
    return stitch(parts)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def moments(sys: FractalSystem, m_max: int) -> MomentTable:
    """Exact power moments integral x**m f(x) dx by closed-form recursion.

    Splitting the integral over subintervals and substituting the
    self-referential equation expresses each moment through the lower ones
    and the profile moments, which are integrals of piecewise polynomials.
    """
    if not 0 <= m_max <= MAX_MOMENT:
        raise ValueError(f"m_max must be in 0..{MAX_MOMENT}")
    part = sys.partition
    alpha = sys.scales.alpha
    a = part.ratios
    b = part.intercepts

    profile = assemble_profile(sys)
    q_moments = np.array([profile.moment(m) for m in range(m_max + 1)])

    values = np.empty(m_max + 1)
    values[0] = q_moments[0] / (1.0 - float(np.sum(a * alpha)))
    for m in range(1, m_max + 1):
        acc = q_moments[m]
        for k in range(m):
            weight = float(np.sum(alpha * a ** (k + 1) * b ** (m - k)))
            acc += math.comb(m, k) * values[k] * weight
        values[m] = acc / (1.0 - float(np.sum(alpha * a ** (m + 1))))
    return MomentTable(values=values, q_moments=q_moments, method="recursion")


def _panel_refine(n: int, depth: int) -> int:
    refine = _PANEL_REFINE
    while refine > 0 and n ** (depth + refine + 1) > _CELL_BUDGET:
        refine -= 1
    if n ** (depth + refine + 1) > _CELL_BUDGET:
        raise DepthTooLarge(
            f"{n ** (depth + 1)} quadrature cells exceed the internal budget"
        )
    return refine


def panel_quadrature(sys: FractalSystem, integrands, depth: int) -> list[complex]:
    """Midpoint quadrature of integrand(x) * f(x) over the address panels.

    Seeds one exact midpoint evaluation per mesh cell (eval_at at depth
    2*depth) and pushes position, value and cell width through the maps, so
    every cell midpoint carries its exact attractor value up to the seed
    certificate.  All integrands are integrated in one sweep.
    """
    part = sys.partition
    n = part.n
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if n ** depth > row_cap():
        raise DepthTooLarge(
            f"{n ** depth} panels exceed the cap of {row_cap()}"
        )
    levels = depth + _panel_refine(n, depth)

    xs = 0.5 * (part.knots[:-1] + part.knots[1:])
    ws = part.widths.copy()
    vs = np.array([eval_at(sys, float(c), 2 * depth).value for c in xs])
    for _ in range(levels):
        m = len(xs)
        new_xs = np.empty(m * n)
        new_vs = np.empty(m * n)
        new_ws = np.empty(m * n)
        for i in range(n):
            seg = slice(i * m, (i + 1) * m)
            new_xs[seg] = part.ratios[i] * xs + part.intercepts[i]
            new_vs[seg] = sys.scales.alpha[i] * vs + sys.shifts[i](xs)
            new_ws[seg] = part.ratios[i] * ws
        xs, vs, ws = new_xs, new_vs, new_ws

    weighted = vs * ws
    return [complex(np.sum(g(xs) * weighted)) for g in integrands]


def moment_oracle(sys: FractalSystem, m: int, depth: int) -> float:
    """Quadrature estimate of the m-th moment, independent of the recursion."""
    (value,) = panel_quadrature(sys, [lambda x: x ** m], depth)
    return value.real


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def _poly_power_integral(coeffs: np.ndarray, lo: float, hi: float, j: int) -> float:
    """Exact integral of x**j * p(x) over [lo, hi]."""
    shifted = np.concatenate([np.zeros(j), coeffs])
    anti = npoly.polyint(shifted)
    return float(npoly.polyval(hi, anti) - npoly.polyval(lo, anti))


def _poly_exp_integral(coeffs: np.ndarray, lo: float, hi: float,
                       lam: complex) -> complex:
    """Exact integral of p(x) * exp(lam * x) over [lo, hi].

    Small |lam * x| uses the Taylor expansion of the exponential (the
    integration-by-parts form divides by lam and cancels badly there);
    otherwise repeated integration by parts closes the integral directly.
    """
    scale = max(abs(lam * lo), abs(lam * hi))
    if scale <= 2.0:
        acc = 0.0 + 0.0j
        lam_pow = 1.0 + 0.0j
        for j in range(120):
            term = lam_pow * _poly_power_integral(coeffs, lo, hi, j)
            acc += term
            if j > 2 and abs(term) <= 1e-18 * (1.0 + abs(acc)):
                break
            lam_pow *= lam / (j + 1)
        return acc

    def antiderivative(x: float) -> complex:
        total = 0.0 + 0.0j
        der = np.asarray(coeffs, dtype=float)
        sign = 1.0
        power = lam
        while True:
            total += sign * npoly.polyval(x, der) / power
            if len(der) == 1:
                break
            der = npoly.polyder(der)
            sign = -sign
            power *= lam
        return cmath.exp(lam * x) * total

    return antiderivative(hi) - antiderivative(lo)


def _profile_transform(profile: PiecewisePolynomial, kind: TransformKind,
                       s: float) -> complex:
    """Closed-form (or adaptive, for Stieltjes) transform of the profile."""
    if kind is TransformKind.STIELTJES:
        total = 0.0
        for j, coeffs in enumerate(profile.pieces):
            lo = float(profile.breakpoints[j])
            hi = float(profile.breakpoints[j + 1])
            val, _ = _scipy_quad(
                lambda x, c=coeffs: npoly.polyval(x, c) / (s - x),
                lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200,
            )
            total += val
        return complex(total)
    lam = -s if kind is TransformKind.LAPLACE else 1j * s
    total = 0.0 + 0.0j
    for j, coeffs in enumerate(profile.pieces):
        total += _poly_exp_integral(
            coeffs, float(profile.breakpoints[j]),
            float(profile.breakpoints[j + 1]), lam,
        )
    return total


def _kernel(kind: TransformKind, s: float):
    if kind is TransformKind.LAPLACE:
        return lambda x: np.exp(-s * x)
    if kind is TransformKind.FOURIER:
        return lambda x: np.exp(1j * s * x)
    return lambda x: 1.0 / (s - x)


def _check_stieltjes_argument(sys: FractalSystem, s: float):
    lo, hi = sys.partition.lo, sys.partition.hi
    if lo <= s <= hi:
        raise StieltjesPole(f"argument {s} lies inside [{lo}, {hi}]")


def transform(sys: FractalSystem, kind: TransformKind | str, s: float,
              method: str = "quadrature", depth: int = 12,
              tol: float = 1e-8) -> complex:
    """Integral transform of the attractor at a real argument.

    method="quadrature" integrates kernel(x, s) * f(x) by the panel scheme at
    the given depth and works for every kind.  method="series" uses the
    equidistant-mesh Fourier expansion: the transform value is a series of
    profile transforms at scaled arguments whose coefficients are products of
    the character sum of the scale vector; it is truncated once the term
    bound max|scale|**i * M_Q drops below tol.
    """
    kind = TransformKind(kind)
    s = float(s)
    if kind is TransformKind.STIELTJES:
        _check_stieltjes_argument(sys, s)

    if method == "quadrature":
        (value,) = panel_quadrature(sys, [_kernel(kind, s)], depth)
        return value
    if method != "series":
        raise ValueError(f"unknown method {method!r}")

    if kind is not TransformKind.FOURIER:
        raise SeriesNotApplicable("the series form is Fourier-only")
    part = sys.partition
    if not part.is_equidistant():
        raise SeriesNotApplicable("the series form needs an equidistant mesh")

    n = part.n
    alpha = sys.scales.alpha
    intercepts = part.intercepts
    profile = assemble_profile(sys)
    m_q = part.span * profile.sup_abs()
    sup = sys.scales.sup

    def character(sigma: float) -> complex:
        return complex(np.sum(alpha * np.exp(1j * sigma * intercepts))) / n

    total = 0.0 + 0.0j
    prod = 1.0 + 0.0j
    i = 0
    while sup ** i * m_q > tol or i == 0:
        arg = s / n ** i
        total += prod * _profile_transform(profile, kind, arg)
        prod *= character(arg)
        i += 1
        if i > 10_000:
            break
    return total


def transform_residual(sys: FractalSystem, kind: TransformKind | str, s: float,
                       depth: int = 12) -> float:
    """How well quadrature values satisfy the transform functional equation.

    Laplace and Fourier relate the transform at s to the transforms at the
    ratio-scaled arguments with exponential twist factors; Stieltjes relates
    it to the pulled-back arguments with the bare scale factors.  All values
    on both sides come from the panel quadrature at the same depth.
    """
    kind = TransformKind(kind)
    s = float(s)
    part = sys.partition
    alpha = sys.scales.alpha
    a = part.ratios
    b = part.intercepts
    profile = assemble_profile(sys)

    if kind is TransformKind.STIELTJES:
        _check_stieltjes_argument(sys, s)
        shifted = [(s - float(b[i])) / float(a[i]) for i in range(part.n)]
        for arg in shifted:
            _check_stieltjes_argument(sys, arg)
        factors = [complex(alpha[i]) for i in range(part.n)]
    else:
        sign = -1.0 if kind is TransformKind.LAPLACE else 1j
        shifted = [float(a[i]) * s for i in range(part.n)]
        factors = [a[i] * alpha[i] * cmath.exp(sign * s * b[i])
                   for i in range(part.n)]

    lhs = transform(sys, kind, s, method="quadrature", depth=depth)
    rhs = _profile_transform(profile, kind, s)
    for factor, arg in zip(factors, shifted):
        rhs += factor * transform(sys, kind, arg, method="quadrature", depth=depth)
    return abs(lhs - rhs)
