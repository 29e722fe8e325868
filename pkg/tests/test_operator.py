import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtedge import NumericError, ParameterError, SingularityError
from rmtedge import operator as op
from rmtedge.airy_system import airy_kernel
from rmtedge.specfun import airy, hermite_phi, make_grid

# K_Ai(0, 0) = Ai'(0)^2, mpmath
KAI_00 = 0.0669874837796639741436845419046
# F_2(0) from the Painleve representation, independent ODE solve
F2_ZERO = 0.9693728283556198


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def test_zero_kernel():
    o = op.discretize(_zero, lower=0.0, count=20)
    assert np.all(o.kernel_matrix == 0.0)
    assert op.fredholm_det(o) == 1.0
    f = np.cos(o.grid.nodes)
    assert np.max(np.abs(op.resolvent_apply(o, f) - f)) < 1e-15


def test_separable_kernel_matrix():
    o = op.discretize(lambda x, y: np.exp(-x - y), lower=0.0, count=30)
    g = np.sqrt(o.grid.weights) * np.exp(-o.grid.nodes)
    assert np.max(np.abs(o.kernel_matrix - np.outer(g, g))) < 1e-15


def test_rank_one_determinant():
    o = op.discretize(lambda x, y: np.exp(-x - y), lower=0.0, count=40)
    assert op.fredholm_det(o) == pytest.approx(0.5, abs=1e-10)


def test_rank_one_sherman_morrison():
    f = lambda x: np.exp(-x)
    g = lambda x: x * np.exp(-2 * x)
    o = op.discretize(lambda x, y: 0.7 * f(x) * g(y), lower=0.0, count=40, symmetric=False)
    x = o.grid.nodes
    h = np.sin(x) * np.exp(-x)
    got = op.resolvent_apply(o, h)
    # (I - a f g^T)^{-1} h = h + a f <g, h> / (1 - a <g, f>)
    a = 0.7
    expect = h + a * f(x) * op.inner(g(x), h, o.grid) / (1 - a * op.inner(g(x), f(x), o.grid))
    assert np.max(np.abs(got - expect)) < 1e-12
    dense = np.linalg.solve(np.eye(40) - a * np.outer(f(x), g(x) * o.grid.weights), h)
    assert np.max(np.abs(got - dense)) < 1e-12


def test_resolvent_round_trip():
    o = op.discretize(airy_kernel, lower=-1.0, count=60)
    f = np.exp(-np.abs(o.grid.nodes))
    y = op.resolvent_apply(o, f)
    assert np.max(np.abs(y - op.apply_kernel(o, y) - f)) < 1e-11


def test_resolvent_identity_random_vectors():
    o = op.discretize(airy_kernel, lower=-2.0, count=60)
    rng = np.random.default_rng(3)
    vs = rng.standard_normal((60, 10))
    rho_v = op.resolvent_apply(o, vs)
    rhs = vs + op.resolvent_apply(o, op.apply_kernel(o, vs))
    assert np.max(np.abs(rho_v - rhs)) < 1e-10


def test_airy_determinant_self_convergence():
    d80 = op.fredholm_det(op.discretize(airy_kernel, lower=0.0, count=80))
    d160 = op.fredholm_det(op.discretize(airy_kernel, lower=0.0, count=160))
    assert abs(d80 - d160) < 1e-10
    assert d160 == pytest.approx(F2_ZERO, abs=1e-10)


def test_airy_determinant_doubling_monotone():
    ds = [op.fredholm_det(op.discretize(airy_kernel, lower=0.0, count=m)) for m in (10, 20, 40)]
    assert abs(ds[1] - ds[2]) < abs(ds[0] - ds[1])


def test_airy_determinant_extrapolated():
    ds = [op.fredholm_det(op.discretize(airy_kernel, lower=0.0, count=m)) for m in (40, 80, 160)]
    assert ds[-1] == pytest.approx(F2_ZERO, abs=1e-9)


def test_det_matches_dense_oracle():
    o = op.discretize(airy_kernel, lower=-1.0, count=20)
    dense = np.linalg.det(np.eye(20) - o.kernel_matrix)
    assert op.fredholm_det(o) == pytest.approx(dense, abs=1e-12)


def test_kernel_matrix_symmetric():
    o = op.discretize(airy_kernel, lower=-3.0, count=50)
    assert np.max(np.abs(o.kernel_matrix - o.kernel_matrix.T)) <= 1e-12


def test_q0_grid_doubling_at_minus_two():
    vals = []
    for m in (80, 160):
        o = op.discretize(airy_kernel, lower=-2.0, count=m)
        q = op.resolvent_apply(o, airy(o.grid.nodes)[0])
        vals.append(op.extend(o, airy_kernel, q, airy(np.array([-1.0, 0.5]))[0], [-1.0, 0.5]))
    assert np.max(np.abs(vals[0] - vals[1])) < 1e-9


def test_inner_examples():
    g = make_grid(0.0, 60)
    e = np.exp(-g.nodes)
    assert op.inner(e, e, g) == pytest.approx(0.5, abs=1e-12)
    ai = airy(g.nodes)[0]
    assert op.inner(ai, ai, g) == pytest.approx(KAI_00, abs=1e-10)
    h = make_grid(-20.0, 160, "exponential", 10.0)
    phi0 = np.array([hermite_phi(0, x) for x in h.nodes])
    assert op.inner(phi0, phi0, h) == pytest.approx(1.0, abs=1e-10)


def test_inner_grid_mismatch():
    g = make_grid(0.0, 20)
    with pytest.raises(ParameterError):
        op.inner(np.ones(20), np.ones(21), g)
    o = op.discretize(_zero, lower=0.0, count=20)
    with pytest.raises(ParameterError):
        op.resolvent_apply(o, np.ones(19))


def test_non_finite_kernel_reports_node_pair():
    with pytest.raises(NumericError, match="node pair"):
        op.discretize(lambda x, y: np.where(x == y, np.nan, 0.0), lower=0.0, count=10)


def test_singular_operator_detected():
    # (I - K) with K = f f^T, ||f|| = 1 exactly on the grid
    g = make_grid(0.0, 30)
    f = np.exp(-g.nodes)
    f = f / math.sqrt(op.inner(f, f, g))
    kmat = np.outer(np.sqrt(g.weights) * f, np.sqrt(g.weights) * f)
    with pytest.raises(SingularityError):
        op.from_matrix(g, kmat)


def test_spectral_radius_above_one_detected():
    with pytest.raises(SingularityError):
        op.discretize(lambda x, y: 3.0 * np.exp(-x - y), lower=0.0, count=30)


def test_converged_det_reports_count():
    det, count = op.converged_det(lambda m: op.discretize(airy_kernel, lower=0.0, count=m), start=40)
    assert det == pytest.approx(F2_ZERO, abs=1e-10) and count >= 80


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-2.0, 2.0))
def test_rank_one_determinant_property(a, s):
    # det(I - a f f^T) = 1 - a ||f||^2 on (s, inf) with f = e^{-x}
    o = op.discretize(lambda x, y: a * np.exp(-x - y) * math.exp(2 * s), lower=s, count=40)
    assert op.fredholm_det(o) == pytest.approx(1 - a / 2, abs=1e-10)
