import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fraclib import (
    BadData,
    DataSet,
    DerivativeScaleViolation,
    DomainMismatch,
    EndpointMismatch,
    FractalSystem,
    NonMonotonicKnots,
    PiecewisePolynomial,
    ScaleFactors,
    ScaleOutOfRange,
    TooFewKnots,
    Variant,
    build_affine_fif,
    build_alpha_fractal,
    build_interpolatory_discontinuous,
    derivative_system,
    knot_values,
    left_knot_values,
    make_partition,
    validate,
)
from conftest import affine


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------

def test_partition_coefficients():
    p = make_partition([0.0, 0.5, 1.0])
    assert_allclose(p.ratios, [0.5, 0.5])
    assert_allclose(p.intercepts, [0.0, 0.5])
    p = make_partition([0.0, 0.25, 0.75, 1.0])
    assert_allclose(p.ratios, [0.25, 0.5, 0.25])
    assert_allclose(p.intercepts, [0.0, 0.25, 0.75])


def test_partition_maps_hit_subinterval_endpoints():
    p = make_partition([-1.0, 0.25, 0.5, 3.0])
    for i in range(1, p.n + 1):
        assert_allclose(p.map_to(i, p.lo), p.knots[i - 1], atol=1e-12)
        assert_allclose(p.map_to(i, p.hi), p.knots[i], atol=1e-12)


def test_partition_errors():
    with pytest.raises(TooFewKnots):
        make_partition([0.0, 1.0])
    with pytest.raises(NonMonotonicKnots):
        make_partition([0.0, 1.0, 1.0])
    with pytest.raises(NonMonotonicKnots):
        make_partition([0.0, 2.0, 1.0])


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=9, unique=True))
@settings(max_examples=80, deadline=None)
def test_partition_ratio_sum_is_one(knots):
    knots = sorted(knots)
    if min(np.diff(knots)) < 1e-6:
        return
    p = make_partition(knots)
    assert abs(float(np.sum(p.ratios)) - 1.0) <= 1e-12
    assert np.all(p.ratios > 0) and np.all(p.ratios < 1)


def test_locate_halfopen():
    p = make_partition([0.0, 0.5, 1.0])
    assert list(p.locate(np.array([0.0, 0.49, 0.5, 1.0]))) == [1, 1, 2, 2]


def test_scale_factors():
    with pytest.raises(ScaleOutOfRange):
        ScaleFactors(np.array([1.0, 0.5]))
    with pytest.raises(ScaleOutOfRange):
        ScaleFactors(np.array([np.nan]))
    s = ScaleFactors(np.array([-0.6, 0.2]))
    assert s.sup == 0.6 and len(s) == 2


def test_dataset_validation():
    with pytest.raises(BadData):
        DataSet(np.array([0.0, 0.0, 1.0]), np.zeros(3))
    d = DataSet.from_points([(0, 1), (1, 2), (2, 3)])
    assert_allclose(d.ys, [1, 2, 3])


def test_system_validation():
    part = make_partition([0.0, 0.5, 1.0])
    q = affine(0.0, 1.0)
    with pytest.raises(DomainMismatch):
        FractalSystem(part, ScaleFactors(np.array([0.5])), [q, q])
    short = affine(0.0, 1.0, 0.0, 0.5)
    with pytest.raises(DomainMismatch):
        FractalSystem(part, ScaleFactors(np.array([0.5, 0.5])), [q, short])


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def test_affine_fif_coefficients(tent_data):
    sys = build_affine_fif(tent_data, ScaleFactors(np.array([0.75, 0.75])))
    # equal endpoint ordinates kill the scale terms in both coefficients
    assert_allclose(sys.shifts[0].pieces[0], [0.0, 0.5], atol=1e-15)
    assert_allclose(sys.shifts[1].pieces[0], [0.5, -0.5], atol=1e-15)
    flat = build_affine_fif(tent_data, ScaleFactors(np.array([0.0, 0.0])))
    assert_allclose(flat.shifts[0].pieces[0], [0.0, 0.5], atol=1e-15)


def test_affine_fif_interpolates(tent_data):
    sys = build_affine_fif(tent_data, ScaleFactors(np.array([0.3, -0.8])))
    assert_allclose(knot_values(sys), tent_data.ys, atol=1e-12)


def test_affine_fif_zero_data():
    data = DataSet(np.array([0.0, 1.0, 2.0]), np.zeros(3))
    sys = build_affine_fif(data, ScaleFactors(np.array([0.9, -0.9])))
    for q in sys.shifts:
        assert q.sup_abs() == 0.0
    assert_allclose(knot_values(sys), 0.0)


def test_affine_fif_bad_data():
    data = DataSet(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(TooFewKnots):
        build_affine_fif(data, ScaleFactors(np.array([0.5])))


def test_alpha_fractal_identity_curve():
    part = make_partition([0.0, 0.5, 1.0])
    ident = affine(0.0, 1.0)
    sys = build_alpha_fractal(ident, ident, part, ScaleFactors(np.array([0.5, 0.5])))
    # q_1 = L_1(x) - 0.5 x = 0; q_2 = L_2(x) - 0.5 x = 0.5
    assert sys.shifts[0].sup_abs() <= 1e-15
    xs = np.linspace(0, 1, 11)
    assert_allclose(sys.shifts[1](xs), 0.5, atol=1e-15)


def test_alpha_fractal_alpha_zero_reproduces_target():
    part = make_partition([0.0, 0.25, 1.0])
    target = PiecewisePolynomial.single([1.0, -2.0, 3.0], 0.0, 1.0)
    sys = build_alpha_fractal(target, target, part,
                              ScaleFactors(np.array([0.0, 0.0])))
    # with zero scales the attractor is q_i composed back, i.e. the target
    for i in range(1, 3):
        xs = np.linspace(0, 1, 17)
        assert_allclose(sys.shifts[i - 1](xs), target(part.map_to(i, xs)),
                        atol=1e-13)


def test_alpha_fractal_endpoint_mismatch():
    part = make_partition([0.0, 0.5, 1.0])
    target = affine(0.0, 1.0)
    base = affine(0.25, 1.0)
    with pytest.raises(EndpointMismatch):
        build_alpha_fractal(target, base, part, ScaleFactors(np.array([0.5, 0.5])))
    sys = build_alpha_fractal(target, base, part,
                              ScaleFactors(np.array([0.5, 0.5])),
                              continuous=False)
    assert sys.variant_tag is None


def test_interpolatory_discontinuous_example(tent_data):
    sys = build_interpolatory_discontinuous(
        tent_data, ScaleFactors(np.array([0.5, 0.5])), [0.125, 99.0])
    assert_allclose(sys.shifts[0].pieces[0], [0.0, 0.125], atol=1e-15)
    assert_allclose(sys.shifts[1].pieces[0], [0.5, -0.5], atol=1e-15)
    assert_allclose(knot_values(sys), [0.0, 0.5, 0.0], atol=1e-12)
    # the supplied last slope is ignored: same system for any value there
    again = build_interpolatory_discontinuous(
        tent_data, ScaleFactors(np.array([0.5, 0.5])), [0.125, -3.0])
    assert_allclose(again.shifts[1].pieces[0], sys.shifts[1].pieces[0])


def test_interpolatory_discontinuous_zero(tent_data):
    data = DataSet(tent_data.xs, np.zeros(3))
    sys = build_interpolatory_discontinuous(
        data, ScaleFactors(np.array([0.5, 0.5])), [0.0, 0.0])
    assert_allclose(knot_values(sys), 0.0, atol=1e-15)
    assert_allclose(left_knot_values(sys), 0.0, atol=1e-15)


# ---------------------------------------------------------------------------
# derivative systems
# ---------------------------------------------------------------------------

def test_derivative_scales():
    data = DataSet(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 2.5]))
    sys = build_affine_fif(data, ScaleFactors(np.array([0.2, 0.2])))
    d = derivative_system(sys, 1)
    assert_allclose(d.scales.alpha, [0.4, 0.4])
    assert_allclose(derivative_system(sys, 2).scales.alpha, [0.8, 0.8])
    with pytest.raises(DerivativeScaleViolation):
        derivative_system(sys, 3)  # 0.2 >= 0.5**3
    with pytest.raises(DerivativeScaleViolation):
        derivative_system(build_affine_fif(data, ScaleFactors(np.array([0.6, 0.6]))), 1)


def test_derivative_composition_identity():
    part = make_partition([0.0, 0.5, 1.0])
    q = PiecewisePolynomial.single([1.0, 2.0, 3.0, 4.0], 0.0, 1.0)
    sys = FractalSystem(part, ScaleFactors(np.array([0.05, -0.05])), [q, q])
    twice = derivative_system(derivative_system(sys, 1), 1)
    direct = derivative_system(sys, 2)
    assert_allclose(twice.scales.alpha, direct.scales.alpha, atol=1e-15)
    xs = np.linspace(0, 1, 13)
    for a, b in zip(twice.shifts, direct.shifts):
        assert_allclose(a(xs), b(xs), atol=1e-12)


def test_derivative_linear_in_shifts():
    part = make_partition([0.0, 0.5, 1.0])
    q = PiecewisePolynomial.single([1.0, -1.0, 0.5], 0.0, 1.0)
    sys = FractalSystem(part, ScaleFactors(np.array([0.1, 0.1])), [q, q])
    scaled = FractalSystem(part, ScaleFactors(np.array([0.1, 0.1])),
                           [q.scaled(3.0), q.scaled(3.0)])
    d1, d2 = derivative_system(sys), derivative_system(scaled)
    xs = np.linspace(0, 1, 9)
    assert_allclose(3.0 * d1.shifts[0](xs), d2.shifts[0](xs), atol=1e-12)
    assert_allclose(d1.scales.alpha, d2.scales.alpha)


# ---------------------------------------------------------------------------
# knot values and classification
# ---------------------------------------------------------------------------

def test_knot_values_histopolant(histopolant):
    assert_allclose(knot_values(histopolant), [0.5, 1.0, 5.5], atol=1e-12)
    # left limit at the internal knot: 0.5*5.5 + q_1(1) = 4.0, a jump of 3.0
    lefts = left_knot_values(histopolant)
    assert_allclose(lefts[0], 4.0, atol=1e-12)


def test_knot_self_reference_at_endpoints():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = rng.integers(2, 6)
        knots = np.sort(rng.uniform(-2, 2, n + 1))
        while np.min(np.diff(knots)) < 1e-3:
            knots = np.sort(rng.uniform(-2, 2, n + 1))
        data = DataSet(knots, rng.uniform(-3, 3, n + 1))
        alpha = rng.uniform(-0.9, 0.9, n)
        sys = build_affine_fif(data, ScaleFactors(alpha))
        values = knot_values(sys)
        part = sys.partition
        for i in range(1, n + 1):
            for j, fx in ((0, values[0]), (n, values[-1])):
                lhs_x = part.map_to(i, float(part.knots[j]))
                want = sys.scales.alpha[i - 1] * fx + sys.shifts[i - 1](float(part.knots[j]))
                # image of x_0 is the right-continuous value; image of x_N is
                # the left limit at knot i
                got = values[i - 1] if j == 0 else left_knot_values(sys)[i - 1]
                assert_allclose(got, want, atol=1e-12)
                assert part.knots[i - 1] - 1e-12 <= lhs_x <= part.knots[i] + 1e-12


def test_validate_variants(histopolant, tent_data):
    fif = build_affine_fif(tent_data, ScaleFactors(np.array([0.75, 0.75])))
    rep = validate(fif, data=tent_data)
    assert rep.variant is Variant.CONTINUOUS_INTERPOLATORY
    assert np.max(rep.join_residuals) <= 1e-12
    assert rep.epsilon is None

    rep = validate(histopolant)
    assert rep.variant is Variant.GENERAL_BOUNDED
    assert_allclose(rep.join_residuals, [3.0], atol=1e-12)

    case2 = build_interpolatory_discontinuous(
        tent_data, ScaleFactors(np.array([0.5, 0.5])), [0.125, 0.0])
    rep = validate(case2, data=tent_data)
    assert rep.variant is Variant.INTERPOLATORY_DISCONTINUOUS

    perturbed = DataSet(tent_data.xs, tent_data.ys + np.array([0.0, 0.05, 0.0]))
    approx = build_affine_fif(perturbed, ScaleFactors(np.array([0.75, 0.75])))
    rep = validate(approx, data=tent_data)
    assert rep.variant is Variant.CONTINUOUS_APPROXIMANT
    assert rep.epsilon == pytest.approx(0.05, abs=1e-12)


def test_validate_deterministic(histopolant):
    a = validate(histopolant)
    b = validate(histopolant)
    assert a.variant is b.variant and a.ck_order == b.ck_order
    assert_allclose(a.join_residuals, b.join_residuals)


def test_ck_order():
    part = make_partition([0.0, 0.5, 1.0])
    q = affine(0.0, 1.0)
    # |alpha| = 0.2 < 0.5^2 = 0.25 but >= 0.5^3
    sys = FractalSystem(part, ScaleFactors(np.array([0.2, 0.2])), [q, q])
    assert validate(sys).ck_order == 2
    smooth = FractalSystem(part, ScaleFactors(np.array([0.0, 0.0])), [q, q])
    assert validate(smooth).ck_order == 64  # capped for zero scales
