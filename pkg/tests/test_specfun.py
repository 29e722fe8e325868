import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtedge import CapabilityError, DomainError, ParameterError
from rmtedge.specfun import (
    ScalingParams,
    airy,
    airy_maclaurin,
    composite_gauss,
    gauss_legendre,
    hermite_functions,
    hermite_phi,
    hermite_phi_pair,
    make_grid,
    tau,
    tau_inverse,
)

# mpmath (30 digits) reference values, frozen
AIRY_REFERENCE = [
    (-12.5, -0.27627456138116024823, -0.41933133041950516441),
    (-7.3, 0.33577037051514727697, -0.18009580448329365985),
    (-2.2, 0.0961453780076688799, 0.6862448249090017474),
    (0.0, 0.35502805388781723926, -0.25881940379280679841),
    (0.7, 0.18916240039815008218, -0.19985119158228048105),
    (3.3, 0.0037872884268267545819, -0.0071424877858847401285),
    (9.1, 1.8242282535640280405e-9, -5.5520373443859194353e-9),
    (18.0, 1.0600466825247955656e-23, -4.5120018606819418892e-23),
]


@pytest.mark.parametrize("x, ai, aip", AIRY_REFERENCE)
def test_airy_against_reference(x, ai, aip):
    a, ap = airy(x)
    assert a == pytest.approx(ai, abs=1e-13)
    assert ap == pytest.approx(aip, abs=1e-13)


def test_airy_at_zero_matches_maclaurin():
    a, ap = airy(0.0)
    sa, sap = airy_maclaurin(np.array([0.0]))
    assert a == pytest.approx(0.3550280539, abs=1e-10)
    assert ap == pytest.approx(-0.2588194038, abs=1e-10)
    assert a == pytest.approx(float(sa[0]), abs=1e-15)
    assert ap == pytest.approx(float(sap[0]), abs=1e-15)


def test_airy_array_shape_follows_input():
    x = np.linspace(-3, 3, 12).reshape(3, 4)
    a, ap = airy(x)
    assert a.shape == x.shape and ap.shape == x.shape
    assert isinstance(airy(1.0)[0], float)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_airy_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        airy(bad)


def _second_difference(x, h=1e-3):
    f = lambda y: airy(y)[0]
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def test_airy_ode_residual_at_1_7():
    x = 1.7
    assert abs(_second_difference(x) - x * airy(x)[0]) < 1e-8


@settings(max_examples=100, deadline=None)
@given(st.floats(-10.0, 5.0))
def test_airy_ode_residual_property(x):
    assert abs(_second_difference(x) - x * airy(x)[0]) < 1e-7


def test_airy_derivative_consistent_with_values():
    x = np.linspace(-14, 19, 200)
    h = 1e-5
    fd = (airy(x + h)[0] - airy(x - h)[0]) / (2 * h)
    assert np.max(np.abs(fd - airy(x)[1])) < 1e-8


def test_airy_seams_are_continuous():
    # the evaluator switches method at the ends of its anchor table
    for seam in (-16.25, -16.0, 20.0, 20.25):
        left = airy(seam - 1e-12)
        right = airy(seam + 1e-12)
        assert abs(left[0] - right[0]) < 1e-11
        assert abs(left[1] - right[1]) < 1e-11


def test_hermite_phi_zero():
    assert hermite_phi(0, 0.0) == pytest.approx(math.pi**-0.25, abs=1e-15)


def test_hermite_phi_exact_h5():
    # H_5(x) = 32x^5 - 160x^3 + 120x, normalized, evaluated at 2 with mpmath
    assert hermite_phi(5, 2.0) == pytest.approx(-0.0262468952793100552253550580661, abs=1e-12)


def test_hermite_orthonormality():
    nodes, weights = composite_gauss(-20.0, 20.0, 0.5, 20)
    table = hermite_functions(12, nodes)
    gram = (table * weights) @ table.T
    assert np.max(np.abs(gram - np.eye(13))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.floats(-25.0, 25.0))
def test_hermite_recurrence_property(k, x):
    lo, mid, hi = hermite_functions(k + 1, np.array([x]))[k - 1:k + 2, 0]
    rhs = x * math.sqrt(2.0 / (k + 1)) * mid - math.sqrt(k / (k + 1)) * lo
    assert abs(hi - rhs) < 1e-12


def test_hermite_large_order_no_overflow():
    x = math.sqrt(2 * 9000 + 1)
    v = hermite_phi(9000, x)
    assert math.isfinite(v) and v != 0.0
    a, b = hermite_phi_pair(9000, x)
    assert a == v and math.isfinite(b)


def test_hermite_order_limits():
    with pytest.raises(CapabilityError):
        hermite_phi(10**4 + 1, 0.0)
    with pytest.raises(ParameterError):
        hermite_phi(-1, 0.0)


def test_tau_examples():
    assert tau(ScalingParams(2, 0.0), 0.0) == pytest.approx(2.0, abs=1e-15)
    assert tau(ScalingParams(1, 0.0), 0.0) == pytest.approx(math.sqrt(2), abs=1e-15)
    p = ScalingParams(50, 1.0)
    assert tau_inverse(p, tau(p, -3.7)) == pytest.approx(-3.7, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.integers(6, 10**6), st.floats(-5, 5), st.floats(-50, 50))
def test_tau_round_trip_property(n, c, x):
    p = ScalingParams(n, c)
    assert abs(tau_inverse(p, tau(p, x)) - x) <= 1e-14 * max(1.0, abs(p.center / p.width))


def test_scaling_params_validation():
    with pytest.raises(ParameterError):
        ScalingParams(0)
    with pytest.raises(ParameterError):
        ScalingParams(3, math.inf)
    with pytest.raises(ParameterError):
        ScalingParams(1, -2.0)


def test_gauss_legendre_two_points():
    x, w = gauss_legendre(2)
    assert np.allclose(x, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(w, [1.0, 1.0], atol=1e-15)


def test_grid_known_integrals():
    g = make_grid(0.0, 40, "exponential")
    assert g.integrate(np.exp(-g.nodes)) == pytest.approx(1.0, abs=1e-12)
    assert g.integrate(g.nodes * np.exp(-g.nodes**2)) == pytest.approx(0.5, abs=1e-12)


def test_grid_invariants_and_validation():
    for kind in ("exponential", "algebraic"):
        g = make_grid(-1.5, 30, kind, 2.0)
        assert np.all(np.diff(g.nodes) > 0) and np.all(g.weights > 0)
        assert g.nodes[0] > -1.5 and g.count == 30
    with pytest.raises(ParameterError):
        make_grid(0.0, 3)
    with pytest.raises(ParameterError):
        make_grid(0.0, 10, "trapezoid")


def test_grid_refinement_does_not_hurt():
    integrands = [
        (lambda x: np.exp(-x), 1.0),
        (lambda x: x * np.exp(-x * x), 0.5),
    ]
    for f, exact in integrands:
        errs = []
        for count in (10, 20, 40, 80):
            g = make_grid(0.0, count)
            errs.append(abs(g.integrate(f(g.nodes)) - exact))
        for a, b in zip(errs, errs[1:]):
            assert b <= max(a, 1e-15)
