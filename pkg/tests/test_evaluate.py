import numpy as np
import pytest
from numpy.testing import assert_allclose

from fraclib import (
    Address,
    DataSet,
    DepthTooLarge,
    FractalSystem,
    GridMismatch,
    OutOfDomain,
    PiecewisePolynomial,
    ScaleFactors,
    build_affine_fif,
    chaos_game,
    collage_bound,
    eval_at,
    grid_points,
    knot_values,
    make_partition,
    minkowski_dimension,
    rb_apply,
    sample_grid,
    self_residual,
    sup_bound,
    vertical_distances,
)
from conftest import affine


@pytest.fixture
def tent75(tent_data):
    return build_affine_fif(tent_data, ScaleFactors(np.array([0.75, 0.75])))


# ---------------------------------------------------------------------------
# addresses
# ---------------------------------------------------------------------------

def test_address_roundtrip():
    a = Address((1, 2, 1))
    assert a.to_string() == "121"
    assert Address.from_string("121") == a
    wide = Address((3, 11, 2))
    assert Address.from_string(wide.to_string()) == wide
    with pytest.raises(ValueError):
        Address((0, 1))


def test_address_panel(histopolant):
    lo, hi = Address((1, 2)).panel(histopolant)
    # L_1(L_2([0,1])) = L_1([0.5,1]) = [0.25, 0.5]
    assert_allclose([lo, hi], [0.25, 0.5], atol=1e-15)


# ---------------------------------------------------------------------------
# eval_at
# ---------------------------------------------------------------------------

def test_eval_knot_recursion(tent75):
    # 0.25 = L_1(0.5): one step reaches a knot, so the value is exact
    res = eval_at(tent75, 0.25, 5)
    assert res.value == pytest.approx(0.625, abs=1e-15)
    assert res.error_bound == 0.0
    assert res.depth_used == 1


def test_eval_endpoints_exact(histopolant):
    for x, want in ((0.0, 0.5), (1.0, 5.5), (0.5, 1.0)):
        res = eval_at(histopolant, x, 9)
        assert res.value == pytest.approx(want, abs=1e-12)
        assert res.error_bound == 0.0


def test_eval_zero_scales_exact_after_one_step(tent_data):
    sys = build_affine_fif(tent_data, ScaleFactors(np.array([0.0, 0.0])))
    res = eval_at(sys, 0.3141, 1)
    assert res.error_bound == 0.0
    # the attractor is the data polyline, slope 1 on the left half
    assert res.value == pytest.approx(0.3141, abs=1e-12)


def test_eval_out_of_domain(histopolant):
    with pytest.raises(OutOfDomain):
        eval_at(histopolant, -0.1, 3)
    with pytest.raises(OutOfDomain):
        eval_at(histopolant, 1.1, 3)


def test_eval_error_certificate(histopolant, tent75):
    rng = np.random.default_rng(11)
    for sys in (histopolant, tent75):
        xs = rng.uniform(0, 1, 100)
        for x in xs:
            coarse = eval_at(sys, float(x), 4)
            fine = eval_at(sys, float(x), 12)
            assert abs(coarse.value - fine.value) <= coarse.error_bound + 1e-15


def test_eval_bound_formula(histopolant):
    res = eval_at(histopolant, 1.0 / 3.0, 3)
    b = sup_bound(histopolant)
    assert res.error_bound == pytest.approx(2.0 * b * 0.5 ** 3, rel=1e-12)


def test_sup_bound_values(histopolant, zero_system):
    assert sup_bound(histopolant) == pytest.approx(5.5, abs=1e-12)
    assert sup_bound(zero_system) == 0.0


# ---------------------------------------------------------------------------
# sample_grid
# ---------------------------------------------------------------------------

def test_grid_depth_zero_is_knots(histopolant):
    g = sample_grid(histopolant, 0)
    assert_allclose(g.xs, [0.0, 0.5, 1.0])
    assert_allclose(g.values, knot_values(histopolant))
    assert not g.duplicates_allowed


def test_grid_depth_one_abscissae(histopolant, tent75):
    g = sample_grid(histopolant, 1)
    # duplicate at the jump knot 0.5
    assert_allclose(g.xs, [0.0, 0.25, 0.5, 0.5, 0.75, 1.0])
    assert g.duplicates_allowed
    left = g.values[2]
    right = g.values[3]
    assert left == pytest.approx(4.0, abs=1e-12)   # left limit before the jump
    assert right == pytest.approx(1.0, abs=1e-12)

    g = sample_grid(tent75, 1)
    # continuous system: the shared point is merged
    assert_allclose(g.xs, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert not g.duplicates_allowed


def test_grid_rows_satisfy_equation(histopolant, tent75):
    for sys in (histopolant, tent75):
        assert self_residual(sys, 10) <= 1e-10


def test_grid_values_below_sup_bound(histopolant, tent75, zero_system):
    for sys in (histopolant, tent75, zero_system):
        g = sample_grid(sys, 14 if sys.n == 2 else 8)
        assert np.max(np.abs(g.values)) <= sup_bound(sys) + 1e-12


def test_grid_sorted_and_in_domain(histopolant):
    g = sample_grid(histopolant, 9)
    assert np.all(np.diff(g.xs) >= 0)
    assert g.xs[0] == 0.0 and g.xs[-1] == 1.0


def test_row_cap(histopolant, monkeypatch):
    monkeypatch.setenv("FRACLIB_ROW_CAP", "100")
    with pytest.raises(DepthTooLarge):
        sample_grid(histopolant, 6)  # 3*2^6 = 192 rows
    assert len(sample_grid(histopolant, 5)) == 96


def test_perturbed_samples_have_residual(histopolant):
    from fraclib import SampleSet
    g = sample_grid(histopolant, 6)
    values = g.values.copy()
    values[17] += 0.01
    bad = SampleSet(xs=g.xs, values=values, codes=g.codes, depth=g.depth,
                    duplicates_allowed=g.duplicates_allowed)
    perturbed = self_residual(histopolant, 6, samples=bad)
    assert perturbed >= 0.005 * (1.0 - histopolant.scales.sup)


# ---------------------------------------------------------------------------
# RB operator on grids
# ---------------------------------------------------------------------------

def test_rb_contraction(histopolant):
    xs, _ = grid_points(histopolant, 8)
    rng = np.random.default_rng(3)
    sup = histopolant.scales.sup
    for _ in range(10):
        g = rng.uniform(-2, 2, len(xs))
        h = rng.uniform(-2, 2, len(xs))
        tg, th = rb_apply(histopolant, xs, g), rb_apply(histopolant, xs, h)
        lhs = np.max(np.abs(tg - th))
        rhs = sup * np.max(np.abs(g - h))
        assert lhs <= rhs + 1e-12


def test_rb_convergence_rate(histopolant):
    xs, f = grid_points(histopolant, 8)
    rng = np.random.default_rng(5)
    g = rng.uniform(-1, 1, len(xs))
    err0 = np.max(np.abs(g - f))
    sup = histopolant.scales.sup
    for n in range(1, 11):
        g = rb_apply(histopolant, xs, g)
        assert np.max(np.abs(g - f)) <= sup ** n * err0 + 1e-12


def test_rb_fixed_point(histopolant):
    xs, f = grid_points(histopolant, 7)
    assert np.max(np.abs(rb_apply(histopolant, xs, f) - f)) <= 1e-12


def test_grid_mismatch(histopolant):
    xs = np.array([0.0, 0.1234, 1.0])
    with pytest.raises(GridMismatch):
        rb_apply(histopolant, xs, np.zeros(3))


# ---------------------------------------------------------------------------
# collage
# ---------------------------------------------------------------------------

def test_collage_fixed_point(tent75):
    _, f = grid_points(tent75, 10)
    rep = collage_bound(tent75, f, 10)
    assert rep.collage_dist <= 1e-12
    assert rep.fixed_point_bound <= 1e-12 / (1 - 0.75) + 1e-15


def test_collage_polyline(tent75, tent_data):
    xs, f = grid_points(tent75, 12)
    polyline = np.interp(xs, tent_data.xs, tent_data.ys)
    rep = collage_bound(tent75, polyline, 12)
    assert rep.collage_dist > 0
    sup_err = float(np.max(np.abs(polyline - f)))
    assert sup_err <= rep.fixed_point_bound + 1e-12


def test_collage_constant_shift(tent75):
    xs, f = grid_points(tent75, 8)
    c = 0.37
    rep = collage_bound(tent75, f + c, 8)
    sup = tent75.scales.sup
    assert rep.collage_dist <= abs(c) * (1 + sup) + 1e-12
    assert rep.fixed_point_bound >= abs(c) - 1e-12
    # equal scales: the collage distance is exactly |c|(1 - alpha)
    assert rep.collage_dist == pytest.approx(abs(c) * (1 - 0.75), abs=1e-12)


def test_collage_accepts_callable(tent75):
    rep = collage_bound(tent75, lambda x: np.zeros_like(x), 6)
    assert rep.collage_dist > 0


# ---------------------------------------------------------------------------
# chaos game
# ---------------------------------------------------------------------------

def test_chaos_reproducible(histopolant):
    a = chaos_game(histopolant, 500, seed=42)
    b = chaos_game(histopolant, 500, seed=42)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.values, b.values)
    c = chaos_game(histopolant, 500, seed=43)
    assert not np.array_equal(a.xs, c.xs)


def test_chaos_stays_in_box(histopolant):
    pts = chaos_game(histopolant, 2000, seed=1)
    assert len(pts) == 2000
    b = max(sup_bound(histopolant), abs(knot_values(histopolant)[0]))
    assert np.all(pts.xs >= 0.0) and np.all(pts.xs <= 1.0)
    assert np.max(np.abs(pts.values)) <= b + 1e-12


def test_chaos_zero_scales_lands_on_profile(tent_data):
    sys = build_affine_fif(tent_data, ScaleFactors(np.array([0.0, 0.0])))
    pts = chaos_game(sys, 300, seed=9, burn_in=1)
    # with zero scales one application lands exactly on the attractor
    for x, y in zip(pts.xs, pts.values):
        assert eval_at(sys, float(x), 1).value == pytest.approx(float(y), abs=1e-12)


def test_chaos_near_graph(histopolant):
    pts = chaos_game(histopolant, 3000, seed=2)
    grid = sample_grid(histopolant, 14)
    dists = vertical_distances(grid, pts.xs, pts.values)
    from fraclib import panel_oscillation_bound
    tau = 2 * sup_bound(histopolant) * histopolant.scales.sup ** 14 \
        + panel_oscillation_bound(histopolant, 14)
    assert float(np.mean(dists <= tau)) >= 0.99


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------

def test_dimension_values(tent_data):
    fif = build_affine_fif(tent_data, ScaleFactors(np.array([0.75, 0.75])))
    assert minkowski_dimension(fif) == pytest.approx(1 + np.log(1.5) / np.log(2),
                                                     abs=1e-10)
    boundary = build_affine_fif(tent_data, ScaleFactors(np.array([0.5, 0.5])))
    assert minkowski_dimension(boundary) == 1.0


def test_dimension_three_equal_intervals():
    part = make_partition([0.0, 1 / 3, 2 / 3, 1.0])
    q = affine(0.0, 0.1)
    sys = FractalSystem(part, ScaleFactors(np.array([0.9, 0.9, 0.9])), [q] * 3)
    assert minkowski_dimension(sys) == pytest.approx(1 + np.log(2.7) / np.log(3),
                                                     abs=1e-10)


def test_dimension_residual(tent_data):
    fif = build_affine_fif(tent_data, ScaleFactors(np.array([0.75, 0.6])))
    d = minkowski_dimension(fif)
    residual = 0.75 * 0.5 ** (d - 1) + 0.6 * 0.5 ** (d - 1) - 1.0
    assert abs(residual) <= 1e-11
