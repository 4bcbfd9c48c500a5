"""Piecewise polynomials with exact calculus.

Coefficients are stored in ascending powers of the *global* abscissa, one
coefficient array per piece.  Piece selection is half open: a breakpoint
belongs to the piece on its right, except the final breakpoint which closes
the last piece.  All operations (composition with an increasing affine map,
linear combination, differentiation, definite integrals against x**m,
sup-norms) are carried out in closed form; nothing here is sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainMismatch

# Relative tolerance used when merging or comparing breakpoints.
_BP_RTOL = 1e-12


def _trim(coeffs: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    n = len(c)
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    return c[:n].copy()


def _compose_affine_coeffs(coeffs: np.ndarray, shift: float, ratio: float) -> np.ndarray:
    """Coefficients of p(ratio*x + shift), by Horner in polynomial arithmetic."""
    result = np.array([coeffs[-1]], dtype=float)
    for k in range(len(coeffs) - 2, -1, -1):
        result = npoly.polymul(result, [shift, ratio])
        result[0] += coeffs[k]
    return _trim(result)


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial:
    """A polynomial spline without any continuity requirement between pieces."""

    breakpoints: np.ndarray
    pieces: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2:
            raise DomainMismatch("need at least two breakpoints")
        if not np.all(np.diff(bp) > 0):
            raise DomainMismatch("breakpoints must be strictly increasing")
        if len(self.pieces) != len(bp) - 1:
            raise DomainMismatch(
                f"{len(bp) - 1} cells but {len(self.pieces)} coefficient arrays"
            )
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", [_trim(c) for c in self.pieces])

    # -- constructors ---------------------------------------------------------

    @classmethod
    def single(cls, coeffs, lo: float, hi: float) -> "PiecewisePolynomial":
        """One polynomial piece on [lo, hi]; coeffs in ascending powers."""
        return cls(np.array([lo, hi], dtype=float), [np.asarray(coeffs, dtype=float)])

    @classmethod
    def zero(cls, lo: float, hi: float) -> "PiecewisePolynomial":
        return cls.single([0.0], lo, hi)

    # -- basic queries ---------------------------------------------------------

    @property
    def lo(self) -> float:
        return float(self.breakpoints[0])

    @property
    def hi(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def degree(self) -> int:
        return max(len(c) - 1 for c in self.pieces)

    def piece_index(self, x):
        """Half-open cell lookup; the final breakpoint closes the last cell."""
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        idx = self.piece_index(xa)
        out = np.empty_like(xa)
        for j, coeffs in enumerate(self.pieces):
            mask = idx == j
            if np.any(mask):
                out[mask] = npoly.polyval(xa[mask], coeffs)
        return float(out[0]) if scalar else out

    # -- calculus ---------------------------------------------------------------

    def derivative(self, order: int = 1) -> "PiecewisePolynomial":
        pieces = [npoly.polyder(c, m=order) if len(c) > order else np.array([0.0])
                  for c in self.pieces]
        return PiecewisePolynomial(self.breakpoints.copy(), pieces)

    def moment(self, m: int = 0) -> float:
        """Exact integral of x**m * p(x) over the full domain."""
        total = 0.0
        for j, coeffs in enumerate(self.pieces):
            shifted = np.concatenate([np.zeros(m), coeffs])
            anti = npoly.polyint(shifted)
            a, b = self.breakpoints[j], self.breakpoints[j + 1]
            total += npoly.polyval(b, anti) - npoly.polyval(a, anti)
        return float(total)

    def integral(self, lo: float | None = None, hi: float | None = None) -> float:
        """Exact integral of p over [lo, hi] (defaults to the full domain)."""
        lo = self.lo if lo is None else float(lo)
        hi = self.hi if hi is None else float(hi)
        total = 0.0
        for j, coeffs in enumerate(self.pieces):
            a = max(lo, float(self.breakpoints[j]))
            b = min(hi, float(self.breakpoints[j + 1]))
            if b <= a:
                continue
            anti = npoly.polyint(coeffs)
            total += npoly.polyval(b, anti) - npoly.polyval(a, anti)
        return float(total)

    def sup_abs(self) -> float:
        """Exact max of |p| over the domain, via critical points."""
        best = 0.0
        for j, coeffs in enumerate(self.pieces):
            a, b = float(self.breakpoints[j]), float(self.breakpoints[j + 1])
            xs = [a, b]
            if len(coeffs) > 2:
                der = npoly.polyder(coeffs)
                roots = npoly.polyroots(der)
                scale = max(1.0, abs(a), abs(b))
                for r in roots:
                    if abs(r.imag) <= 1e-9 * scale and a < r.real < b:
                        xs.append(float(r.real))
            vals = npoly.polyval(np.array(xs), coeffs)
            best = max(best, float(np.max(np.abs(vals))))
        return best

    def lipschitz_bound(self) -> float:
        """sup |p'| over the domain; a Lipschitz constant away from jumps."""
        return self.derivative().sup_abs()

    # -- algebra -----------------------------------------------------------------

    def scaled(self, c: float) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints.copy(),
                                   [coeffs * c for coeffs in self.pieces])

    def compose_affine(self, ratio: float, shift: float,
                       lo: float, hi: float) -> "PiecewisePolynomial":
        """p(ratio*x + shift) restricted to x in [lo, hi]; ratio must be > 0.

        The affine image [ratio*lo + shift, ratio*hi + shift] must sit inside
        the domain of p (up to roundoff slack).
        """
        if ratio <= 0:
            raise DomainMismatch("composition requires an increasing affine map")
        t_lo = ratio * lo + shift
        t_hi = ratio * hi + shift
        span = self.hi - self.lo
        if t_lo < self.lo - _BP_RTOL * span or t_hi > self.hi + _BP_RTOL * span:
            raise DomainMismatch("affine image leaves the polynomial's domain")
        cuts = [lo]
        for t in self.breakpoints[1:-1]:
            x = (float(t) - shift) / ratio
            if lo + _BP_RTOL * span < x < hi - _BP_RTOL * span:
                cuts.append(x)
        cuts.append(hi)
        cuts = np.array(sorted(cuts))
        pieces = []
        for j in range(len(cuts) - 1):
            mid = ratio * (0.5 * (cuts[j] + cuts[j + 1])) + shift
            src = self.pieces[int(self.piece_index(mid))]
            pieces.append(_compose_affine_coeffs(src, shift, ratio))
        return PiecewisePolynomial(cuts, pieces)

    def combine(self, other: "PiecewisePolynomial",
                c_self: float = 1.0, c_other: float = 1.0) -> "PiecewisePolynomial":
        """c_self * p + c_other * q on the overlap of the two domains."""
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if hi <= lo:
            raise DomainMismatch("domains do not overlap")
        span = hi - lo
        cuts = [lo, hi]
        for t in np.concatenate([self.breakpoints, other.breakpoints]):
            if lo + _BP_RTOL * span < t < hi - _BP_RTOL * span:
                cuts.append(float(t))
        cuts = np.array(sorted(set(cuts)))
        keep = np.concatenate([[True], np.diff(cuts) > _BP_RTOL * span])
        cuts = cuts[keep]
        pieces = []
        for j in range(len(cuts) - 1):
            mid = 0.5 * (cuts[j] + cuts[j + 1])
            ca = self.pieces[int(self.piece_index(mid))] * c_self
            cb = other.pieces[int(other.piece_index(mid))] * c_other
            n = max(len(ca), len(cb))
            merged = np.zeros(n)
            merged[: len(ca)] += ca
            merged[: len(cb)] += cb
            pieces.append(merged)
        return PiecewisePolynomial(cuts, pieces)

    def __repr__(self):
        return (f"PiecewisePolynomial([{self.lo:g}, {self.hi:g}], "
                f"{len(self.pieces)} pieces, degree {self.degree})")


def stitch(parts: list[PiecewisePolynomial]) -> PiecewisePolynomial:
    """Concatenate abutting piecewise polynomials into one (left to right)."""
    if not parts:
        raise DomainMismatch("nothing to stitch")
    bps = [parts[0].breakpoints]
    pieces: list[np.ndarray] = list(parts[0].pieces)
    for prev, nxt in zip(parts, parts[1:]):
        span = max(prev.hi - prev.lo, nxt.hi - nxt.lo)
        if abs(nxt.lo - prev.hi) > _BP_RTOL * max(span, 1.0):
            raise DomainMismatch("pieces are not contiguous")
        bps.append(nxt.breakpoints[1:])
        pieces.extend(nxt.pieces)
    return PiecewisePolynomial(np.concatenate(bps), pieces)
