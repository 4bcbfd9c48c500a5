import numpy as np
import pytest

from fraclib import (
    DataSet,
    FractalSystem,
    Histogram,
    PiecewisePolynomial,
    ScaleFactors,
    make_partition,
)


def affine(c0, c1, lo=0.0, hi=1.0):
    return PiecewisePolynomial.single([c0, c1], lo, hi)


@pytest.fixture
def histopolant():
    """Discontinuous histopolant for F={2,3} on {0,1/2,1}: q = x+1/4, 2x+3/4."""
    part = make_partition([0.0, 0.5, 1.0])
    return FractalSystem(part, ScaleFactors(np.array([0.5, 0.5])),
                         [affine(0.25, 1.0), affine(0.75, 2.0)])


@pytest.fixture
def tent_data():
    return DataSet(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.5, 0.0]))


@pytest.fixture
def hist_2_3():
    return Histogram(make_partition([0.0, 0.5, 1.0]), np.array([2.0, 3.0]))


@pytest.fixture
def zero_system():
    part = make_partition([0.0, 0.5, 1.0])
    zero = PiecewisePolynomial.zero(0.0, 1.0)
    return FractalSystem(part, ScaleFactors(np.array([0.3, -0.4])), [zero, zero])
