"""Evaluation of self-affine systems: certified point values, address-aligned
sample grids, the chaos game, collage bounds, and box-counting dimension.

The key convention is the half-open address expansion: a point is pulled back
through the unique subinterval map owning it (internal knots belong to the
right), so every sampled value is the right-continuous attractor value, while
left limits at shared panel edges appear as separate rows.
"""

from __future__ import annotations

import itertools
import os
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import DepthTooLarge, GridMismatch, OutOfDomain
from .system import FractalSystem, knot_values

ROW_CAP_ENV = "FRACLIB_ROW_CAP"
DEFAULT_ROW_CAP = 5_000_000

# Tolerance for matching two float paths to the same address-grid point.
_GRID_RTOL = 1e-9


def row_cap() -> int:
    """Row budget for generated grids; override with FRACLIB_ROW_CAP."""
    raw = os.environ.get(ROW_CAP_ENV)
    if raw is None:
        return DEFAULT_ROW_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DepthTooLarge(f"{ROW_CAP_ENV} is not an integer: {raw!r}") from exc
    if cap <= 0:
        raise DepthTooLarge(f"{ROW_CAP_ENV} must be positive")
    return cap


@dataclass(frozen=True)
class Address:
    """A finite address: subinterval digits, outermost first."""

    digits: tuple[int, ...]

    def __post_init__(self):
        if any(d < 1 for d in self.digits):
            raise ValueError("address digits are 1-based")

    @classmethod
    def from_string(cls, code: str) -> "Address":
        if not code:
            return cls(())
        if "," in code:
            return cls(tuple(int(d) for d in code.split(",")))
        return cls(tuple(int(ch) for ch in code))

    def to_string(self) -> str:
        if any(d > 9 for d in self.digits):
            return ",".join(str(d) for d in self.digits)
        return "".join(str(d) for d in self.digits)

    def panel(self, sys: FractalSystem) -> tuple[float, float]:
        """Image interval of the full interval under this address."""
        lo, hi = sys.partition.lo, sys.partition.hi
        for d in reversed(self.digits):
            lo = float(sys.partition.map_to(d, lo))
            hi = float(sys.partition.map_to(d, hi))
        return lo, hi

    def __len__(self):
        return len(self.digits)


def _code_string(digits: tuple[int, ...], n: int) -> str:
    if n > 9:
        return ",".join(str(d) for d in digits)
    return "".join(str(d) for d in digits)


def _first_digit(code: str) -> int:
    if "," in code:
        return int(code.split(",", 1)[0])
    return int(code[0])


@dataclass(frozen=True, eq=False)
class EvalResult:
    value: float
    error_bound: float
    depth_used: int


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Rows (x, value, code), sorted by x with duplicates adjacent.

    Duplicate abscissae occur only at shared panel edges of discontinuous
    systems; there the left-limit row precedes the right-value row.
    """

    xs: np.ndarray
    values: np.ndarray
    codes: list[str]
    depth: int
    duplicates_allowed: bool

    def __len__(self):
        return len(self.xs)


def sup_bound(sys: FractalSystem) -> float:
    """Certified bound for sup |f|: max shift sup-norm over (1 - max |scale|)."""
    m = max(q.sup_abs() for q in sys.shifts)
    return m / (1.0 - sys.scales.sup)


def _poly_scalar(coeffs: np.ndarray, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


def _shift_scalar(q, x: float) -> float:
    """Scalar piecewise-polynomial evaluation without array overhead."""
    if len(q.pieces) == 1:
        return _poly_scalar(q.pieces[0], x)
    j = bisect_right(q.breakpoints, x) - 1
    j = min(max(j, 0), len(q.pieces) - 1)
    return _poly_scalar(q.pieces[j], x)


def eval_at(sys: FractalSystem, x: float, depth: int) -> EvalResult:
    """Certified evaluation by greedy address expansion.

    The point is pulled back `depth` times through the owning maps; the
    innermost unknown value is closed with the estimate 0, whose worst case
    is the sup bound, so the certificate is twice the bound times the product
    of the traversed scale magnitudes.  If a pull-back lands exactly on a
    knot the recursion stops early with the exact value.
    """
    part = sys.partition
    if depth < 0:
        raise ValueError("depth must be >= 0")
    x = float(x)
    slack = _GRID_RTOL * max(part.span, 1.0)
    if x < part.lo - slack or x > part.hi + slack:
        raise OutOfDomain(f"{x} outside [{part.lo}, {part.hi}]")
    x = min(max(x, part.lo), part.hi)

    knots = part.knots
    kv = knot_values(sys)
    alpha = sys.scales.alpha
    ratios = part.ratios
    intercepts = part.intercepts
    bound = sup_bound(sys)

    acc = 0.0
    coeff = 1.0
    t = x
    for used in range(depth + 1):
        j = np.searchsorted(knots, t)
        if j < len(knots) and knots[j] == t:
            return EvalResult(acc + coeff * float(kv[j]), 0.0, used)
        if used == depth:
            break
        i = int(part.locate(t))
        u = (t - float(intercepts[i - 1])) / float(ratios[i - 1])
        acc += coeff * _shift_scalar(sys.shifts[i - 1], u)
        coeff *= float(alpha[i - 1])
        t = u
    return EvalResult(acc, 2.0 * bound * abs(coeff), depth)


# ---------------------------------------------------------------------------
# address-aligned grids
# ---------------------------------------------------------------------------

def sample_grid(sys: FractalSystem, depth: int) -> SampleSet:
    """Exact attractor samples at every depth-`depth` knot image.

    Values are pushed forward from the knot values through the maps, so every
    row is exact up to roundoff.  At shared panel edges of a discontinuous
    system both one-sided rows are kept, left before right; edges where the
    two sides agree collapse to the single right-sided row.
    """
    part = sys.partition
    n = part.n
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rows = (n + 1) * n ** depth
    cap = row_cap()
    if rows > cap:
        raise DepthTooLarge(f"{rows} rows exceed the cap of {cap}")

    xs = part.knots.copy()
    vs = knot_values(sys)
    for _ in range(depth):
        new_xs = np.empty(len(xs) * n)
        new_vs = np.empty(len(xs) * n)
        for i in range(n):
            seg = slice(i * len(xs), (i + 1) * len(xs))
            new_xs[seg] = part.ratios[i] * xs + part.intercepts[i]
            new_vs[seg] = sys.scales.alpha[i] * vs + sys.shifts[i](xs)
        xs, vs = new_xs, new_vs

    block = n + 1
    block_codes = [_code_string(d, n)
                   for d in itertools.product(range(1, n + 1), repeat=depth)]
    codes = [c for c in block_codes for _ in range(block)]

    keep = np.ones(len(xs), dtype=bool)
    duplicates = False
    if depth > 0:
        left = np.arange(1, n ** depth) * block - 1
        right = left + 1
        x_tol = _GRID_RTOL * max(part.span, 1.0)
        v_tol = _GRID_RTOL * max(1.0, float(np.max(np.abs(vs))))
        same_point = np.abs(xs[left] - xs[right]) <= x_tol
        # shared edges must agree bit-for-bit in x so the set stays sorted
        xs[left[same_point]] = xs[right[same_point]]
        merge = same_point & (np.abs(vs[left] - vs[right]) <= v_tol)
        keep[left[merge]] = False
        duplicates = bool(np.any(same_point & ~merge))

    xs = xs[keep]
    vs = vs[keep]
    codes = [c for c, k in zip(codes, keep) if k]
    return SampleSet(xs=xs, values=vs, codes=codes, depth=depth,
                     duplicates_allowed=duplicates)


def grid_points(sys: FractalSystem, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Unique grid abscissae with the right-sided attractor values."""
    samples = sample_grid(sys, depth)
    xs, vs = samples.xs, samples.values
    # at a kept duplicate pair the right-sided row comes second
    last = np.ones(len(xs), dtype=bool)
    last[:-1] = np.diff(xs) > 0
    return xs[last], vs[last]


def _parent_indices(sys: FractalSystem, xs: np.ndarray):
    """Owning map and pulled-back position of every grid point, by lookup."""
    part = sys.partition
    owners = part.locate(xs)
    ts = (xs - part.intercepts[owners - 1]) / part.ratios[owners - 1]
    idx = np.clip(np.searchsorted(xs, ts), 0, len(xs) - 1)
    left = np.clip(idx - 1, 0, len(xs) - 1)
    pick_left = np.abs(xs[left] - ts) < np.abs(xs[idx] - ts)
    idx = np.where(pick_left, left, idx)
    tol = _GRID_RTOL * max(part.span, 1.0)
    if np.any(np.abs(xs[idx] - ts) > tol):
        bad = int(np.argmax(np.abs(xs[idx] - ts) > tol))
        raise GridMismatch(
            f"pull-back of grid point {xs[bad]} misses the grid; "
            "candidate values must sit on sample_grid abscissae"
        )
    return owners, ts, idx


def rb_apply(sys: FractalSystem, xs: np.ndarray, values: np.ndarray) -> np.ndarray:
    """One application of the function-space operator to grid samples.

    xs must be address-aligned (sample_grid abscissae), which makes the grid
    closed under pull-back, so no interpolation is involved.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape:
        raise GridMismatch("abscissae and values must have equal length")
    if xs.size > 1 and not np.all(np.diff(xs) > 0):
        raise GridMismatch(
            "abscissae must be strictly increasing; pass one-sided values "
            "(grid_points) rather than a raw sample set"
        )
    owners, ts, idx = _parent_indices(sys, xs)
    out = np.empty_like(values)
    for i in range(1, sys.n + 1):
        mask = owners == i
        if np.any(mask):
            out[mask] = (sys.scales.alpha[i - 1] * values[idx[mask]]
                         + sys.shifts[i - 1](ts[mask]))
    return out


@dataclass(frozen=True, eq=False)
class CollageReport:
    collage_dist: float
    fixed_point_bound: float


def collage_bound(sys: FractalSystem, candidate, depth: int) -> CollageReport:
    """Collage estimate for a candidate sampled on the depth-`depth` grid.

    candidate may be a callable or an array aligned with grid_points(sys,
    depth).  The returned fixed-point bound certifies the sup distance
    between candidate and attractor on that grid.
    """
    xs, _ = grid_points(sys, depth)
    if callable(candidate):
        phi = np.asarray([float(candidate(x)) for x in xs])
    else:
        phi = np.asarray(candidate, dtype=float)
        if phi.shape != xs.shape:
            raise GridMismatch(
                f"expected {len(xs)} candidate values, got {len(phi)}"
            )
    t_phi = rb_apply(sys, xs, phi)
    dist = float(np.max(np.abs(phi - t_phi)))
    return CollageReport(collage_dist=dist,
                         fixed_point_bound=dist / (1.0 - sys.scales.sup))


def self_residual(sys: FractalSystem, depth: int,
                  samples: SampleSet | None = None) -> float:
    """Worst violation of the self-referential equation over a sample set.

    Every row is checked against an independent lookup of its parent value,
    so a corrupted sample surfaces either in its own equation or in the
    equations of the rows it feeds.
    """
    if samples is None:
        samples = sample_grid(sys, depth)
    if samples.depth == 0:
        return 0.0
    xs, vs = samples.xs, samples.values
    last = np.ones(len(xs), dtype=bool)
    last[:-1] = np.diff(xs) > 0
    first = np.ones(len(xs), dtype=bool)
    first[1:] = np.diff(xs) > 0
    uxs = xs[last]
    # one value per unique abscissa and side; they differ only across jumps
    u_right = vs[last]
    u_left = vs[first]

    part = sys.partition
    owners = np.array([_first_digit(c) for c in samples.codes])
    ts = (xs - part.intercepts[owners - 1]) / part.ratios[owners - 1]
    idx = np.clip(np.searchsorted(uxs, ts), 0, len(uxs) - 1)
    left = np.clip(idx - 1, 0, len(uxs) - 1)
    pick_left = np.abs(uxs[left] - ts) < np.abs(uxs[idx] - ts)
    idx = np.where(pick_left, left, idx)
    tol = _GRID_RTOL * max(part.span, 1.0)
    if np.any(np.abs(uxs[idx] - ts) > tol):
        raise GridMismatch("sample abscissae are not address-aligned")

    # a row that is the left member of a duplicated pair carries a left-sided
    # limit, so its equation reads the parent's left-sided value as well
    parents = np.where(last, u_right[idx], u_left[idx])

    worst = 0.0
    for i in range(1, sys.n + 1):
        mask = owners == i
        if np.any(mask):
            pred = (sys.scales.alpha[i - 1] * parents[mask]
                    + sys.shifts[i - 1](ts[mask]))
            worst = max(worst, float(np.max(np.abs(vs[mask] - pred))))
    return worst


# ---------------------------------------------------------------------------
# chaos game
# ---------------------------------------------------------------------------

def chaos_game(sys: FractalSystem, n_points: int, seed: int,
               burn_in: int = 64) -> SampleSet:
    """Random-iteration samples of the attractor graph.

    Starts from the left endpoint with its exact attractor value, applies
    uniformly random maps, and discards the first `burn_in` points.  With the
    exact start the emitted points lie on the closure of the graph; the burn
    in guards callers who restart from a perturbed point.
    """
    if n_points < 0:
        raise ValueError("n_points must be >= 0")
    cap = row_cap()
    if n_points > cap:
        raise DepthTooLarge(f"{n_points} rows exceed the cap of {cap}")
    part = sys.partition
    rng = np.random.default_rng(seed)
    digits = rng.integers(1, part.n + 1, size=burn_in + n_points)
    kv = knot_values(sys)

    alpha = [float(a) for a in sys.scales.alpha]
    ratios = [float(r) for r in part.ratios]
    intercepts = [float(b) for b in part.intercepts]

    x = part.lo
    y = float(kv[0])
    xs = np.empty(n_points)
    ys = np.empty(n_points)
    for step, digit in enumerate(digits):
        i = int(digit) - 1
        y = alpha[i] * y + _shift_scalar(sys.shifts[i], x)
        x = ratios[i] * x + intercepts[i]
        if step >= burn_in:
            xs[step - burn_in] = x
            ys[step - burn_in] = y
    return SampleSet(xs=xs, values=ys, codes=[""] * n_points, depth=0,
                     duplicates_allowed=True)


def vertical_distances(samples: SampleSet, xs, ys) -> np.ndarray:
    """Vertical distance from each point to the sampled graph.

    For every query the candidate rows are those at the two bracketing
    sample abscissae, including both sides of a jump.
    """
    gx, gv = samples.xs, samples.values
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    out = np.empty(len(xs))
    for k in range(len(xs)):
        j = np.searchsorted(gx, xs[k])
        lo = max(j - 2, 0)
        hi = min(j + 2, len(gx))
        out[k] = float(np.min(np.abs(gv[lo:hi] - ys[k])))
    return out


def panel_oscillation_bound(sys: FractalSystem, depth: int) -> float:
    """Bound on the attractor's oscillation over any depth-`depth` panel.

    Pushing the crude bound osc <= 2*sup through the maps gives
    osc_k <= s^k * 2B + L * span * sum_j s^j * a_max^(k-1-j), with s the max
    scale magnitude and L the worst shift Lipschitz constant.
    """
    s = sys.scales.sup
    a_max = float(np.max(sys.partition.ratios))
    lip = max(q.lipschitz_bound() for q in sys.shifts)
    omega = 2.0 * sup_bound(sys)
    total = (s ** depth) * omega
    total += lip * sys.partition.span * sum(
        s ** j * a_max ** (depth - 1 - j) for j in range(depth)
    )
    return float(total)


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------

def minkowski_dimension(sys: FractalSystem, tol: float = 1e-12) -> float:
    """Box-counting dimension of the graph for the affine-shift family.

    When the scale magnitudes sum to at most one the graph is
    one-dimensional; otherwise the dimension is the unique D in (1, 2) with
    sum_i |scale_i| * ratio_i**(D-1) = 1, found by bisection.
    """
    alpha_abs = np.abs(sys.scales.alpha)
    ratios = sys.partition.ratios
    if float(np.sum(alpha_abs)) <= 1.0:
        return 1.0

    def g(d: float) -> float:
        return float(np.sum(alpha_abs * ratios ** (d - 1.0))) - 1.0

    lo, hi = 1.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) <= tol:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
