"""Airy-kernel resolvent functions and the Hastings-McLeod solution.

For a left endpoint s the operator K_Ai on L^2(s, inf) is discretized once;
everything else (Q_i, P_i, the scalar families and R) is read off that
single factorization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from . import operator as op_mod
from .errors import InstabilityError, ParameterError
from .specfun import airy, make_grid

DIAGONAL_SWITCH = 1e-6
I_MAX_LIMIT = 4
MU_NODES = 80
HM_ANCHOR = 8.0
HM_LEFT_LIMIT = -10.0


def airy_kernel(x, y):
    """K_Ai(x, y) = (Ai(x)Ai'(y) - Ai(y)Ai'(x)) / (x - y).

    Near the diagonal (|x - y| < 1e-6) the kernel is evaluated at the
    midpoint in its limit form Ai'(m)^2 - m Ai(m)^2; the first-order term of
    the Taylor expansion about the midpoint vanishes by symmetry.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ax, apx = airy(x)
    ay, apy = airy(y)
    d = x - y
    near = np.abs(d) < DIAGONAL_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (ax * apy - ay * apx) / np.where(near, 1.0, d)
    if np.any(near):
        m = 0.5 * (x[near] + y[near])
        am, apm = airy(m)
        out = np.array(out, dtype=float)
        out[near] = apm**2 - m * am**2
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class AirySystemContext:
    """Resolvent tables and scalar functionals at a fixed left endpoint s.

    ``Q_tables[i]`` and ``P_tables[i]`` hold Q_i(x; s), P_i(x; s) at the grid
    nodes.  The scalar arrays are indexed by i = 0..i_max.
    """

    s: float
    i_max: int
    grid: object = field(repr=False)
    resolvent: object = field(repr=False)
    ai: np.ndarray = field(repr=False)
    aip: np.ndarray = field(repr=False)
    Q_tables: np.ndarray = field(repr=False)
    P_tables: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    vtilde: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    mu: float | None = None

    @property
    def nodes(self):
        return self.grid.nodes

    def Q(self, i, x):
        """Q_i(x; s) at arbitrary x >= s by Nystrom extension."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, _ = airy(x)
        return op_mod.extend(self.resolvent, airy_kernel, self.Q_tables[i], x**i * a, x)

    def P(self, i, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        _, ap = airy(x)
        return op_mod.extend(self.resolvent, airy_kernel, self.P_tables[i], x**i * ap, x)

    def R(self):
        """R(x_i, x_j; s) = (rho K)(x_i, x_j) at node pairs."""
        return op_mod.resolvent_kernel(self.resolvent)


def default_scale(s):
    """Map scale for (s, inf): the oscillatory stretch (s, 0) widens as s drops."""
    return 1.0 if s >= -2.0 else 1.0 + (-2.0 - s) / 4.0


def _resolvent_at(s, count, scale=None):
    if scale is None:
        scale = default_scale(s)
    grid = make_grid(s, count, "exponential", scale)
    return op_mod.discretize(airy_kernel, grid=grid)


def q_diagonal(s, count=op_mod.DEFAULT_COUNT, scale=None):
    """q(s) = Q_0(s; s) from the resolvent alone."""
    res = _resolvent_at(s, count, scale)
    x = res.grid.nodes
    a, _ = airy(x)
    table = op_mod.resolvent_apply(res, a)
    return float(op_mod.extend(res, airy_kernel, table, airy(s)[0], s)[0])


def mu_from_resolvent(s, count=op_mod.DEFAULT_COUNT, nodes=MU_NODES):
    """mu(s) = int_s^inf q(x) dx with q(x) = Q_0(x; x) sampled on a companion grid."""
    outer = make_grid(s, nodes, "exponential", 1.0)
    vals = np.array([q_diagonal(x, count) for x in outer.nodes])
    return outer.integrate(vals)


def build_context(s, i_max=I_MAX_LIMIT, count=op_mod.DEFAULT_COUNT, scale=None, with_mu=True):
    """Discretize K_Ai on (s, inf) and populate every table and scalar.

    ``mu`` is filled from a sweep of resolvent diagonals when ``with_mu``.
    """
    if not math.isfinite(s):
        raise ParameterError("s must be finite")
    if not 0 <= i_max <= I_MAX_LIMIT:
        raise ParameterError(f"i_max must lie in 0..{I_MAX_LIMIT}")
    res = _resolvent_at(float(s), count, scale)
    x = res.grid.nodes
    ai, aip = airy(x)
    powers = x[None, :] ** np.arange(i_max + 1)[:, None]
    rhs = np.concatenate([powers * ai, powers * aip]).T
    sol = op_mod.resolvent_apply(res, rhs).T
    Q = sol[: i_max + 1]
    P = sol[i_max + 1:]

    # values at x = s through the Nystrom extension
    ks = airy_kernel(np.full_like(x, s), x) * res.grid.weights
    s_pow = float(s) ** np.arange(i_max + 1)
    a_s, ap_s = airy(float(s))
    q = s_pow * a_s + Q @ ks
    p = s_pow * ap_s + P @ ks

    w8 = res.grid.weights
    u = Q @ (w8 * ai)
    v = P @ (w8 * ai)
    vtilde = Q @ (w8 * aip)
    w = P @ (w8 * aip)
    mu = mu_from_resolvent(float(s), count) if with_mu else None
    arrays = [ai, aip, Q, P, q, p, u, v, vtilde, w]
    for arr in arrays:
        arr.setflags(write=False)
    return AirySystemContext(float(s), int(i_max), res.grid, res, *arrays, mu=mu)


def recurrence_check(ctx, k):
    """Max residual of Q_k = x^k Q - sum_{i+j=k-1} (v_j Q_i - u_j P_i) on the grid."""
    if not 0 <= k <= ctx.i_max:
        raise ParameterError("k out of range for this context")
    x = ctx.nodes
    rhs = x**k * ctx.Q_tables[0]
    for i in range(k):
        j = k - 1 - i
        rhs = rhs - (ctx.v[j] * ctx.Q_tables[i] - ctx.u[j] * ctx.P_tables[i])
    return float(np.max(np.abs(ctx.Q_tables[k] - rhs)))


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of the three inner-product reductions for one k."""

    k: int
    variant: str
    lhs: tuple
    rhs: tuple

    @property
    def residuals(self):
        return tuple(abs(a - b) for a, b in zip(self.lhs, self.rhs))

    @property
    def max_residual(self):
        return max(self.residuals)


def x_ai_reduction(ctx, k):
    """(Q_k, X Ai) in terms of scalars."""
    u, v, vt = ctx.u, ctx.v, ctx.vtilde
    return u[k + 1] + u[0] * vt[k] - v[0] * u[k]


def x2_ai_reduction(ctx, k, variant="displayed"):
    """(Q_k, X^2 Ai) in terms of scalars.

    ``displayed`` reproduces the published reduction term by term;
    ``corrected`` flips the three terms carrying u(s) that come from
    expanding -u(s)(X P - w Q + v P), which is what P_1 actually equals.
    """
    u, v, vt, w = ctx.u, ctx.v, ctx.vtilde, ctx.w
    base = (u[k + 2] - v[0] * u[k + 1] - v[0] * u[0] * vt[k] + v[0] ** 2 * u[k]
            - v[1] * u[k] + u[1] * vt[k])
    mixed = -u[0] * vt[k + 1] + u[0] * w[0] * u[k] - u[0] * v[0] * vt[k]
    if variant == "displayed":
        return base + mixed
    if variant == "corrected":
        return base - mixed
    raise ParameterError(f"unknown variant {variant!r}")


def x_aip_reduction(ctx, k):
    """(Q_k, X Ai') in terms of scalars."""
    v, vt, w, u = ctx.v, ctx.vtilde, ctx.w, ctx.u
    return vt[k + 1] + v[0] * vt[k] - w[0] * u[k]


def inner_product_identities(ctx, k, variant="displayed"):
    """Quadrature vs scalar reduction for (Q_k, XAi), (Q_k, X^2Ai), (Q_k, XAi')."""
    if not 0 <= k or k + 2 > ctx.i_max:
        raise ParameterError("need k + 2 <= i_max")
    x = ctx.nodes
    qk = ctx.Q_tables[k]
    lhs = (
        op_mod.inner(qk, x * ctx.ai, ctx.grid),
        op_mod.inner(qk, x**2 * ctx.ai, ctx.grid),
        op_mod.inner(qk, x * ctx.aip, ctx.grid),
    )
    rhs = (
        float(x_ai_reduction(ctx, k)),
        float(x2_ai_reduction(ctx, k, variant)),
        float(x_aip_reduction(ctx, k)),
    )
    return IdentityReport(k, variant, lhs, rhs)


# ---------------------------------------------------------------------------
# Painleve II


def _painleve_rhs(s, y):
    q, dq, _ = y
    return [dq, s * q + 2.0 * q**3, -q]


def _solve_hm(s_min, max_step=np.inf, dense=False, t_eval=None):
    a, ap = airy(HM_ANCHOR)
    tail = make_grid(HM_ANCHOR, 40, "exponential", 1.0)
    mu_anchor = tail.integrate(airy(tail.nodes)[0])
    sol = solve_ivp(
        _painleve_rhs, (HM_ANCHOR, s_min), [a, ap, mu_anchor], method="DOP853",
        rtol=1e-13, atol=1e-18, max_step=max_step, dense_output=dense, t_eval=t_eval,
    )
    if not sol.success:
        raise InstabilityError(f"Painleve II integration failed: {sol.message}; try a smaller step")
    return sol


def _check_branch(s, q):
    # Hastings-McLeod stays positive and close to sqrt(-s/2) on the left.
    bound = np.sqrt(np.maximum(-s, 0.0) / 2.0) + 1.0
    if np.any(q <= 0) or np.any(q > 2.0 * bound):
        raise InstabilityError("solution left the Hastings-McLeod branch; try a smaller step")


@dataclass(frozen=True)
class PainleveTable:
    s: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    mu: np.ndarray


def hastings_mcleod(s_min, s_max, step):
    """Hastings-McLeod solution of q'' = s q + 2 q^3 sampled on [s_min, s_max].

    Integrated leftward from the Airy data at s = 8 with DOP853 (rtol 1e-13);
    ``step`` is the output spacing; the integrator step is capped at 0.05.
    mu(s) = int_s^inf q is carried along as a third component.
    """
    if s_min < HM_LEFT_LIMIT or s_max > HM_ANCHOR or s_min >= s_max or step <= 0:
        raise ParameterError(f"need {HM_LEFT_LIMIT} <= s_min < s_max <= {HM_ANCHOR} and step > 0")
    grid = np.arange(s_max, s_min - 0.5 * step, -step)
    grid = grid[grid >= s_min - 1e-12]
    sol = _solve_hm(s_min, max_step=min(step, 0.05), t_eval=grid)
    q = sol.y[0]
    _check_branch(sol.t, q)
    order = np.argsort(sol.t)
    return PainleveTable(sol.t[order], q[order], sol.y[1][order], sol.y[2][order])


@lru_cache(maxsize=1)
def _hm_dense():
    sol = _solve_hm(HM_LEFT_LIMIT, max_step=0.05, dense=True)
    _check_branch(sol.t, sol.y[0])
    return sol.sol


def painleve_q(s):
    """Hastings-McLeod q(s) for s >= -10 (Ai(s) beyond the anchor)."""
    s = float(s)
    if s < HM_LEFT_LIMIT:
        raise ParameterError(f"s must be >= {HM_LEFT_LIMIT}")
    if s >= HM_ANCHOR:
        return airy(s)[0]
    return float(_hm_dense()(s)[0])


def mu(s):
    """mu(s) = int_s^inf q(x) dx along the Hastings-McLeod solution."""
    s = float(s)
    if s < HM_LEFT_LIMIT:
        raise ParameterError(f"s must be >= {HM_LEFT_LIMIT}")
    if s >= HM_ANCHOR:
        tail = make_grid(s, 40, "exponential", 1.0)
        return tail.integrate(airy(tail.nodes)[0])
    return float(_hm_dense()(s)[2])


def R_pair(ctx, x, y):
    """R(x, y; s) at arbitrary points, from (I - K) r = K(., y) and extension in x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = float(y)
    nodes = ctx.nodes
    col = op_mod.resolvent_apply(ctx.resolvent, airy_kernel(nodes, np.full_like(nodes, y)))
    return op_mod.extend(ctx.resolvent, airy_kernel, col, airy_kernel(x, np.full_like(x, y)), x)


def airy_det(s, start=op_mod.DEFAULT_COUNT, tol=1e-10):
    """F_2(s) = det(I - K_Ai) on (s, inf), self-converged under grid doubling."""
    det, _ = op_mod.converged_det(lambda m: _resolvent_at(float(s), m), start=start, tol=tol)
    return det
