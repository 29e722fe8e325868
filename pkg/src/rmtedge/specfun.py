"""Scalar special functions and quadrature rules.

Airy evaluation
---------------
``airy`` combines three representations:

* a table of anchors ``(Ai, Ai')`` on a lattice of spacing 0.5 over
  [-16, 20], built once by high-order Taylor continuation of the Airy
  equation ``y'' = x y``.  The positive chain starts from the asymptotic
  expansion at x = 20 and marches left (the stable direction for Ai);
  the negative chain starts from the Maclaurin values at 0 and marches
  left through the oscillatory region.
* local Taylor series about the nearest anchor (|h| <= 0.25) for any x in
  the anchored range.
* the standard large-|x| asymptotic expansions outside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DomainError, ParameterError

AI0 = 0.355028053887817239260063186004
AIP0 = -0.258819403792806798405183560189

_ANCHOR_LO = -16.0
_ANCHOR_HI = 20.0
_ANCHOR_STEP = 0.5
_TAYLOR_TERMS = 48
_ASYMP_TERMS = 20

HERMITE_MAX_ORDER = 10_000


def _as_finite_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


# ---------------------------------------------------------------------------
# Airy function


def airy_maclaurin(x, terms=60):
    """Ai and Ai' from the Maclaurin series (accurate only for moderate |x|)."""
    x = np.asarray(x, dtype=float)
    x3 = x**3
    f = np.ones_like(x)
    fp = np.zeros_like(x)
    g = x.copy()
    gp = np.ones_like(x)
    a = np.ones_like(x)  # x^{3k} coefficient of f
    b = 0.5 * x**2  # term of f'
    c = x.copy()  # term of g
    d = np.ones_like(x)  # term of g'
    for k in range(1, terms):
        a = a * x3 / ((3 * k - 1) * (3 * k))
        c = c * x3 / ((3 * k) * (3 * k + 1))
        d = d * x3 / ((3 * k - 2) * (3 * k))
        if k > 1:
            b = b * x3 / ((3 * k - 1) * (3 * k - 3))
        f = f + a
        fp = fp + b
        g = g + c
        gp = gp + d
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


@lru_cache(maxsize=1)
def _asymptotic_coefficients():
    u = [1.0]
    for k in range(1, 2 * _ASYMP_TERMS + 2):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    u = np.array(u)
    k = np.arange(len(u))
    v = -(6 * k + 1) / (6 * k - 1) * u
    return u, v


def _airy_asymptotic_positive(x):
    u, v = _asymptotic_coefficients()
    zeta = (2.0 / 3.0) * x**1.5
    sign = (-1.0) ** np.arange(_ASYMP_TERMS)
    powers = zeta[None, :] ** (-np.arange(_ASYMP_TERMS)[:, None])
    su = np.sum((sign * u[:_ASYMP_TERMS])[:, None] * powers, axis=0)
    sv = np.sum((sign * v[:_ASYMP_TERMS])[:, None] * powers, axis=0)
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pref * su / x**0.25, -pref * sv * x**0.25


def _airy_asymptotic_negative(x):
    # x < 0; expansions in z = -x
    u, v = _asymptotic_coefficients()
    z = -x
    zeta = (2.0 / 3.0) * z**1.5
    m = _ASYMP_TERMS // 2
    k = np.arange(m)
    sign = (-1.0) ** k
    ev = zeta[None, :] ** (-2.0 * k[:, None])
    od = zeta[None, :] ** (-2.0 * k[:, None] - 1.0)
    su_e = np.sum((sign * u[2 * k])[:, None] * ev, axis=0)
    su_o = np.sum((sign * u[2 * k + 1])[:, None] * od, axis=0)
    sv_e = np.sum((sign * v[2 * k])[:, None] * ev, axis=0)
    sv_o = np.sum((sign * v[2 * k + 1])[:, None] * od, axis=0)
    phase = zeta - math.pi / 4.0
    cs, sn = np.cos(phase), np.sin(phase)
    rp = 1.0 / math.sqrt(math.pi)
    ai = rp * z**-0.25 * (cs * su_e + sn * su_o)
    aip = rp * z**0.25 * (sn * sv_e - cs * sv_o)
    return ai, aip


def _taylor_step(x0, y0, y1, h):
    """Advance (y, y') of y'' = x y from x0 by h (all arrays, same shape)."""
    coef = [y0, y1, 0.5 * x0 * y0]
    for k in range(1, _TAYLOR_TERMS - 2):
        coef.append((x0 * coef[k] + coef[k - 1]) / ((k + 2) * (k + 1)))
    val = np.zeros_like(h)
    der = np.zeros_like(h)
    for k in range(_TAYLOR_TERMS - 1, 0, -1):
        val = val * h + coef[k]
        der = der * h + k * coef[k]
    val = val * h + coef[0]
    return val, der


@lru_cache(maxsize=1)
def _anchor_table():
    xs = np.arange(_ANCHOR_LO, _ANCHOR_HI + 0.5 * _ANCHOR_STEP, _ANCHOR_STEP)
    ai = np.empty_like(xs)
    aip = np.empty_like(xs)
    i0 = int(round(-_ANCHOR_LO / _ANCHOR_STEP))
    top = len(xs) - 1
    a, ap = _airy_asymptotic_positive(np.array([xs[top]]))
    ai[top], aip[top] = a[0], ap[0]
    for j in range(top, i0 + 1, -1):
        a, ap = _taylor_step(np.array([xs[j]]), np.array([ai[j]]), np.array([aip[j]]),
                             np.array([-_ANCHOR_STEP]))
        ai[j - 1], aip[j - 1] = a[0], ap[0]
    ai[i0], aip[i0] = AI0, AIP0
    for j in range(i0, 0, -1):
        a, ap = _taylor_step(np.array([xs[j]]), np.array([ai[j]]), np.array([aip[j]]),
                             np.array([-_ANCHOR_STEP]))
        ai[j - 1], aip[j - 1] = a[0], ap[0]
    return xs, ai, aip


def airy(x):
    """Return ``(Ai(x), Ai'(x))``.

    Accepts scalars or arrays; the return type follows the input.  The
    absolute error is below 1e-13 on [-15, 20].

    Raises
    ------
    DomainError
        If any input is NaN or infinite.
    """
    arr = _as_finite_array(x)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)

    xs, tai, taip = _anchor_table()
    idx = np.rint((flat - _ANCHOR_LO) / _ANCHOR_STEP).astype(np.int64)
    inside = (idx >= 0) & (idx < len(xs))
    if inside.any():
        j = idx[inside]
        h = flat[inside] - xs[j]
        ai[inside], aip[inside] = _taylor_step(xs[j], tai[j], taip[j], h)
    right = ~inside & (flat > 0)
    if right.any():
        ai[right], aip[right] = _airy_asymptotic_positive(flat[right])
    left = ~inside & (flat < 0)
    if left.any():
        ai[left], aip[left] = _airy_asymptotic_negative(flat[left])

    if scalar:
        return float(ai[0]), float(aip[0])
    return ai.reshape(arr.shape), aip.reshape(arr.shape)


# ---------------------------------------------------------------------------
# Hermite functions

_RESCALE = 1e150


def hermite_functions(kmax, x):
    """Table ``phi_k(x)`` for k = 0..kmax, shape ``(kmax + 1,) + x.shape``.

    phi_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2), generated with the
    normalized three-term recurrence on a running log scale so neither the
    polynomial part nor the Gaussian overflows/underflows prematurely.
    """
    _check_order(kmax)
    x = _as_finite_array(x)
    shape = x.shape
    x = np.atleast_1d(x).ravel()
    out = np.empty((kmax + 1, x.size))
    half_sq = 0.5 * x * x
    logscale = np.zeros_like(x)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, math.pi**-0.25)
    out[0] = p * np.exp(-half_sq)
    for j in range(kmax):
        p_next = x * math.sqrt(2.0 / (j + 1)) * p - math.sqrt(j / (j + 1)) * p_prev
        big = np.abs(p_next) > _RESCALE
        if big.any():
            p_next[big] /= _RESCALE
            p[big] /= _RESCALE
            logscale[big] += math.log(_RESCALE)
        p_prev, p = p, p_next
        out[j + 1] = p * np.exp(logscale - half_sq)
    return out.reshape((kmax + 1,) + shape)


def _check_order(k):
    if k < 0:
        raise ParameterError("Hermite order must be non-negative")
    if k > HERMITE_MAX_ORDER:
        raise CapabilityError(f"Hermite order {k} exceeds {HERMITE_MAX_ORDER}")


def _hermite_top_two(k, flat):
    half_sq = 0.5 * flat * flat
    logscale = np.zeros_like(flat)
    p_prev = np.zeros_like(flat)
    p = np.full_like(flat, math.pi**-0.25)
    for j in range(k):
        p_next = flat * math.sqrt(2.0 / (j + 1)) * p - math.sqrt(j / (j + 1)) * p_prev
        big = np.abs(p_next) > _RESCALE
        if big.any():
            p_next[big] /= _RESCALE
            p[big] /= _RESCALE
            logscale[big] += math.log(_RESCALE)
        p_prev, p = p, p_next
    scale = np.exp(logscale - half_sq)
    return p * scale, p_prev * scale


def hermite_phi(k, x):
    """Normalized Hermite function phi_k(x) (scalar or array)."""
    _check_order(k)
    x = _as_finite_array(x)
    hi, _ = _hermite_top_two(k, np.atleast_1d(x).ravel())
    if x.ndim == 0:
        return float(hi[0])
    return hi.reshape(x.shape)


def hermite_phi_pair(k, x):
    """``(phi_k(x), phi_{k-1}(x))`` from a single recurrence pass; k >= 1."""
    if k < 1:
        raise ParameterError("k must be at least 1")
    _check_order(k)
    x = _as_finite_array(x)
    hi, lo = _hermite_top_two(k, np.atleast_1d(x).ravel())
    if x.ndim == 0:
        return float(hi[0]), float(lo[0])
    return hi.reshape(x.shape), lo.reshape(x.shape)


# ---------------------------------------------------------------------------
# Rescaling


@dataclass(frozen=True)
class ScalingParams:
    """Matrix size ``n`` and the free shift ``c`` of the edge rescaling."""

    n: int
    c: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.c):
            raise ParameterError("c must be finite")
        if self.n + self.c <= 0:
            raise ParameterError("n + c must be positive")

    @property
    def center(self):
        return math.sqrt(2.0 * (self.n + self.c))

    @property
    def width(self):
        """d tau / dx = 2^{-1/2} n^{-1/6}."""
        return 2.0**-0.5 * self.n ** (-1.0 / 6.0)


def tau(params, x):
    """Edge rescaling tau(x) = sqrt(2(n+c)) + 2^{-1/2} n^{-1/6} x."""
    if np.ndim(x):
        return params.center + params.width * np.asarray(x, dtype=float)
    return params.center + params.width * float(x)


def tau_inverse(params, y):
    if np.ndim(y):
        return (np.asarray(y, dtype=float) - params.center) / params.width
    return (float(y) - params.center) / params.width


# ---------------------------------------------------------------------------
# Quadrature


def gauss_legendre(count):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if count < 1:
        raise ParameterError("count must be positive")
    return np.polynomial.legendre.leggauss(count)


MAP_KINDS = ("exponential", "algebraic")


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights realizing integrals over (lower_endpoint, inf)."""

    lower_endpoint: float
    map_kind: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    scale: float = 1.0

    @property
    def count(self):
        return len(self.nodes)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def same_as(self, other):
        return (
            self.count == other.count
            and self.lower_endpoint == other.lower_endpoint
            and np.array_equal(self.nodes, other.nodes)
        )


def make_grid(lower, count, map_kind="exponential", scale=1.0):
    """Gauss-Legendre rule on (lower, inf) through a change of variables.

    ``exponential``: x = lower - scale*log(1-u); ``algebraic``:
    x = lower + scale*u/(1-u), with u in (0, 1) the mapped Legendre nodes.
    """
    if int(count) != count or count < 4:
        raise ParameterError(f"grid count must be an integer >= 4, got {count!r}")
    if map_kind not in MAP_KINDS:
        raise ParameterError(f"unknown map kind {map_kind!r}")
    if not (math.isfinite(lower) and scale > 0):
        raise ParameterError("lower must be finite and scale positive")
    xi, wi = gauss_legendre(int(count))
    u = 0.5 * (xi + 1.0)
    wu = 0.5 * wi
    one_minus = 0.5 * (1.0 - xi)  # 1 - u without cancellation
    if map_kind == "exponential":
        nodes = lower - scale * np.log(one_minus)
        weights = wu * scale / one_minus
    else:
        nodes = lower + scale * u / one_minus
        weights = wu * scale / one_minus**2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(float(lower), map_kind, nodes, weights, float(scale))


def composite_gauss(a, b, panel_width=0.5, order=20):
    """Composite Gauss-Legendre nodes/weights on the finite interval [a, b]."""
    if b <= a:
        return np.empty(0), np.empty(0)
    panels = max(1, int(math.ceil((b - a) / panel_width)))
    xi, wi = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights
