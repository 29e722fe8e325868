"""Exact finite-n objects of the Gaussian ensembles by direct quadrature.

Conventions: phi = (n/2)^{1/4} phi_n and psi = (n/2)^{1/4} phi_{n-1}, so the
Christoffel-Darboux kernel reads K_n(x, y) = (phi(x)psi(y) - psi(x)phi(y))/(x - y)
= sum_{k<n} phi_k(x) phi_k(y).  Integrals over (t, inf) use a mapped
Gauss-Legendre grid; integrals reaching -inf are truncated at -C with a
tail check, where C grows with n so the truncation stays beyond the edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import operator as op_mod
from .airy_system import DIAGONAL_SWITCH, default_scale
from .errors import ParameterError, TruncationError
from .specfun import (
    ScalingParams,
    composite_gauss,
    hermite_functions,
    hermite_phi_pair,
    make_grid,
    tau_inverse,
)

F_N2_MAX = 200
TAIL_BOUND = 1e-15
ENSEMBLES = ("GOE", "GSE")


def truncation_point(n):
    """Symmetric cutoff C for integrals over the real line."""
    return max(20.0, math.sqrt(2.0 * n + 1.0) + 12.0)


def scaled_pair(n, x):
    """(phi(x), psi(x)) = (n/2)^{1/4} (phi_n(x), phi_{n-1}(x))."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    a, b = hermite_phi_pair(n, x)
    s = (n / 2.0) ** 0.25
    return s * a, s * b


def _cd_from_tables(n, x, y, fx, gx, fy, gy):
    d = x - y
    near = np.abs(d) < DIAGONAL_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (fx * gy - gx * fy) / np.where(near, 1.0, d)
    if np.any(near):
        m = 0.5 * (x + y)[near]
        a, b = hermite_phi_pair(n, m)
        # K_n(m, m) = n (phi_n^2 + phi_{n-1}^2) - sqrt(2n) m phi_n phi_{n-1}
        out = np.array(out, dtype=float)
        out[near] = n * (a * a + b * b) - math.sqrt(2.0 * n) * m * a * b
    return out


def kernel_n(n, x, y):
    """Christoffel-Darboux kernel K_n(x, y) with the diagonal limit near x = y."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    fx, gx = scaled_pair(n, x)
    fy, gy = scaled_pair(n, y)
    out = _cd_from_tables(n, x, y, fx, gx, fy, gy)
    return float(out) if np.ndim(out) == 0 else out


def kernel_n_sum(n, x, y):
    """sum_{k<n} phi_k(x) phi_k(y) evaluated term by term."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    hx = hermite_functions(n - 1, x)
    hy = hermite_functions(n - 1, y)
    out = np.sum(hx * hy, axis=0)
    return float(out) if np.ndim(out) == 0 else out


def default_grid(n, t, count=op_mod.DEFAULT_COUNT, scale=None):
    """Grid on (t, inf) scaled to the edge width 2^{-1/2} n^{-1/6}."""
    if scale is None:
        params = ScalingParams(n)
        scale = params.width * default_scale(tau_inverse(params, t))
    return make_grid(float(t), count, "exponential", scale)


def discretize_n(n, grid):
    """DiscretizedOperator for K_n; Hermite tables are built once per node."""
    x = grid.nodes
    f, g = scaled_pair(n, x)
    vals = _cd_from_tables(n, x[:, None], x[None, :], f[:, None], g[:, None], f[None, :], g[None, :])
    sw = np.sqrt(grid.weights)
    kmat = sw[:, None] * vals * sw[None, :]
    return op_mod.from_matrix(grid, 0.5 * (kmat + kmat.T))


def F_n2(n, t, count=op_mod.DEFAULT_COUNT, tol=1e-10):
    """P(lambda_max < t) for the n x n GUE, det(I - K_n) on (t, inf).

    The grid is doubled from ``count`` until successive determinants agree
    to ``tol``; failure raises AccuracyError carrying the achieved change.
    """
    if not 1 <= n <= F_N2_MAX:
        raise ParameterError(f"n must lie in 1..{F_N2_MAX}")
    det, _ = op_mod.converged_det(lambda m: discretize_n(n, default_grid(n, t, m)), start=count, tol=tol)
    return det


# ---------------------------------------------------------------------------
# Integrals reaching -inf


def _check_tails(values_left, values_right, what):
    worst = max(float(np.max(np.abs(values_left))), float(np.max(np.abs(values_right))))
    if worst >= TAIL_BOUND:
        raise TruncationError(f"{what} is {worst:.2e} at the truncation point")


def hermite_cumulative(kmax, t, cutoff, panel_width=0.25, order=20):
    """J_k(t) = int_{-inf}^t phi_k, k = 0..kmax, truncated at -cutoff."""
    nodes, weights = composite_gauss(-cutoff, min(t, cutoff), panel_width, order)
    if nodes.size == 0:
        return np.zeros(kmax + 1)
    return hermite_functions(kmax, nodes) @ weights


def epsilon_apply(f, x, cutoff=20.0, panel_width=0.25, order=20):
    """eps(f)(x) = 1/2 int sign(x - y) f(y) dy for a vectorized callable f.

    The real line is truncated to [-cutoff, cutoff]; f must be below 1e-15
    in magnitude at both ends.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    _check_tails(f(np.array([-cutoff])), f(np.array([cutoff])), "integrand")
    panels = int(math.ceil(2.0 * cutoff / panel_width))
    edges = np.linspace(-cutoff, cutoff, panels + 1)
    xi, wi = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pnodes = mid[:, None] + half[:, None] * xi[None, :]
    panel_int = (f(pnodes.ravel()).reshape(pnodes.shape) * wi[None, :]) @ np.ones(order) * half
    # right_tail[p] = integral over panels p..end
    right_tail = np.concatenate([np.cumsum(panel_int[::-1])[::-1], [0.0]])
    total = right_tail[0]

    xc = np.clip(x, -cutoff, cutoff)
    p = np.clip(np.searchsorted(edges, xc, side="right") - 1, 0, panels - 1)
    a = xc
    b = edges[p + 1]
    hh = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + hh[:, None] * xi[None, :]
    partial = (f(nodes.ravel()).reshape(nodes.shape) @ wi) * hh
    upper = partial + right_tail[p + 1]  # int_x^cutoff f
    out = 0.5 * total - upper
    if scalar:
        return float(out[0])
    return out


def half_integral(f, cutoff=20.0):
    """1/2 int_R f over [-cutoff, cutoff] with the tail check."""
    _check_tails(f(np.array([-cutoff])), f(np.array([cutoff])), "integrand")
    nodes, weights = composite_gauss(-cutoff, cutoff, 0.25, 20)
    return 0.5 * float(np.dot(weights, f(nodes)))


def c_phi(n):
    """(pi n)^{1/4} 2^{-3/4-n/2} (n!)^{1/2} / (n/2)!  for even n, via log-gamma."""
    if int(n) != n or n < 2 or n % 2:
        raise ParameterError("c_phi formula needs an even n >= 2")
    log = (0.25 * math.log(math.pi * n) + (-0.75 - n / 2.0) * math.log(2.0)
           + 0.5 * math.lgamma(n + 1.0) - math.lgamma(n / 2.0 + 1.0))
    return math.exp(log)


def c_phi_quadrature(n):
    """1/2 int phi dx by quadrature (zero for odd n by parity)."""
    return half_integral(lambda x: scaled_pair(n, x)[0], truncation_point(n))


def c_psi(n):
    """1/2 int psi dx by quadrature (zero for even n by parity)."""
    return half_integral(lambda x: scaled_pair(n, x)[1], truncation_point(n))


def c_phi_any(n):
    """c_phi for either parity: the closed formula for even n, 0 for odd n."""
    return c_phi(n) if n % 2 == 0 else 0.0


# ---------------------------------------------------------------------------
# Context


@dataclass(frozen=True)
class FiniteEnsembleContext:
    """Tables and scalar functionals of K_n on (t, inf) for one (n, t)."""

    n: int
    t: float
    i_max: int
    grid: object = field(repr=False)
    resolvent_n: object = field(repr=False)
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    Q_tables: np.ndarray = field(repr=False)
    P_tables: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    vtilde: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    R_factorized: np.ndarray = field(repr=False)
    c_phi: float = 0.0
    c_psi: float = 0.0

    @property
    def nodes(self):
        return self.grid.nodes

    @property
    def cutoff(self):
        return truncation_point(self.n)

    def kernel(self, x, y):
        return kernel_n(self.n, x, y)

    def _extend(self, table, free, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return op_mod.extend(self.resolvent_n, self.kernel, table, free, x)

    def Q(self, i, x):
        """Q_{n,i}(x; t) for any real x by Nystrom extension."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self._extend(self.Q_tables[i], x**i * scaled_pair(self.n, x)[0], x)

    def P(self, i, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self._extend(self.P_tables[i], x**i * scaled_pair(self.n, x)[1], x)

    def R_column(self):
        """R_n(x_j, t; t) at the nodes, from (I - K_n) r = K_n(., t)."""
        kt = self.kernel(self.nodes, np.full_like(self.nodes, self.t))
        return op_mod.resolvent_apply(self.resolvent_n, kt)

    def R_at(self, x):
        """R_n(x, t; t) for any real x (rho K form)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        free = self.kernel(x, np.full_like(x, self.t))
        return self._extend(self.R_column(), free, x)

    def R_at_factorized(self, x):
        """(Q_n(x)P_n(t) - P_n(x)Q_n(t))/(x - t); x must differ from t."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return (self.Q(0, x) * self.p[0] - self.P(0, x) * self.q[0]) / (x - self.t)


def build_finite_context(n, t, i_max=2, count=op_mod.DEFAULT_COUNT, scale=None):
    """Discretize K_n on (t, inf) and fill every table, scalar and constant.

    ``R_factorized`` holds (Q_n(x)P_n(y) - P_n(x)Q_n(y))/(x - y) at node
    pairs; its diagonal (a 0/0 form) is left as NaN.
    """
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")
    if not 0 <= i_max <= 4:
        raise ParameterError("i_max must lie in 0..4")
    n = int(n)
    grid = default_grid(n, t, count, scale)
    res = discretize_n(n, grid)
    x = grid.nodes
    f, g = scaled_pair(n, x)
    powers = x[None, :] ** np.arange(i_max + 1)[:, None]
    sol = op_mod.resolvent_apply(res, np.concatenate([powers * f, powers * g]).T).T
    Q = sol[: i_max + 1]
    P = sol[i_max + 1:]

    kt = kernel_n(n, np.full_like(x, t), x) * grid.weights
    ft, gt = scaled_pair(n, float(t))
    tp = float(t) ** np.arange(i_max + 1)
    q = tp * ft + Q @ kt
    p = tp * gt + P @ kt
    wt = grid.weights
    u = Q @ (wt * f)
    v = P @ (wt * f)
    vt = Q @ (wt * g)
    w = P @ (wt * g)

    R = op_mod.resolvent_kernel(res)
    d = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        Rf = (Q[0][:, None] * P[0][None, :] - P[0][:, None] * Q[0][None, :]) / d
    np.fill_diagonal(Rf, np.nan)

    cphi = c_phi(n) if n % 2 == 0 else 0.0
    cpsi = c_psi(n) if n % 2 == 1 else 0.0
    arrays = [f, g, Q, P, q, p, u, v, vt, w, R, Rf]
    for arr in arrays:
        arr.setflags(write=False)
    return FiniteEnsembleContext(n, float(t), int(i_max), grid, res, *arrays, c_phi=cphi, c_psi=cpsi)


# ---------------------------------------------------------------------------
# epsilon functionals


@dataclass(frozen=True)
class EpsFunctionals:
    q: float
    p: float
    u: float
    v: float
    vtilde: float
    w: float

    @property
    def V(self):
        return 1.0 - self.vtilde


def eps_functionals(ctx):
    """q, p, u, v, vtilde, w built from Q_eps = rho_n eps(phi), P_eps = rho_n eps(psi)."""
    n, x, C = ctx.n, ctx.nodes, ctx.cutoff
    pts = np.concatenate([x, [ctx.t]])
    e_phi = epsilon_apply(lambda y: scaled_pair(n, y)[0], pts, C)
    e_psi = epsilon_apply(lambda y: scaled_pair(n, y)[1], pts, C)
    sol = op_mod.resolvent_apply(ctx.resolvent_n, np.stack([e_phi[:-1], e_psi[:-1]], axis=1))
    Qe, Pe = sol[:, 0], sol[:, 1]
    kt = kernel_n(n, np.full_like(x, ctx.t), x) * ctx.grid.weights
    wt = ctx.grid.weights
    return EpsFunctionals(
        q=float(e_phi[-1] + kt @ Qe),
        p=float(e_psi[-1] + kt @ Pe),
        u=float(np.dot(wt, Qe * ctx.phi)),
        v=float(np.dot(wt, Pe * ctx.phi)),
        vtilde=float(np.dot(wt, Qe * ctx.psi)),
        w=float(np.dot(wt, Pe * ctx.psi)),
    )


# ---------------------------------------------------------------------------
# calligraphic functionals


@dataclass(frozen=True)
class Calligraphic:
    ensemble: str
    Q: float
    P: float
    R: float

    @property
    def R_tilde(self):
        return 1.0 - self.R if self.ensemble == "GOE" else 1.0 + self.R


def _left_integrals(ctx):
    """int_{-inf}^t of Q_n, P_n and R_n(., t) by integrating the extensions exactly.

    For y on the grid, int_{-inf}^t K_n(x, y) dx = sum_k phi_k(y) J_k(t).
    """
    n, x, t = ctx.n, ctx.nodes, ctx.t
    C = ctx.cutoff
    _check_tails(scaled_pair(n, np.array([-C]))[0], scaled_pair(n, np.array([-C]))[1], "phi/psi")
    J = hermite_cumulative(n, t, C)
    s = (n / 2.0) ** 0.25
    G_nodes = J[:n] @ hermite_functions(n - 1, x)
    G_t = float(J[:n] @ hermite_functions(n - 1, np.array([t]))[:, 0])
    gw = G_nodes * ctx.grid.weights
    int_phi = s * J[n]
    int_psi = s * J[n - 1]
    return (
        int_phi + gw @ ctx.Q_tables[0],
        int_psi + gw @ ctx.P_tables[0],
        G_t + gw @ ctx.R_column(),
    )


def calligraphic(ctx, ensemble):
    """GOE: one-sided integrals over (-inf, t]; GSE: eps(x - t)-weighted integrals."""
    if ensemble not in ENSEMBLES:
        raise ParameterError(f"ensemble must be one of {ENSEMBLES}")
    if ensemble == "GOE" and ctx.n % 2:
        raise ParameterError("GOE calligraphic functions need even n")
    if ensemble == "GSE" and ctx.n % 2 == 0:
        raise ParameterError("GSE calligraphic functions need odd n")
    left_Q, left_P, left_R = _left_integrals(ctx)
    if ensemble == "GOE":
        return Calligraphic("GOE", float(left_Q), float(left_P), float(left_R))
    wt = ctx.grid.weights
    right_Q = float(wt @ ctx.Q_tables[0])
    right_P = float(wt @ ctx.P_tables[0])
    right_R = float(wt @ ctx.R_column())
    return Calligraphic(
        "GSE",
        0.5 * (right_Q - left_Q),
        0.5 * (right_P - left_P),
        0.5 * (right_R - left_R),
    )


# ---------------------------------------------------------------------------
# diagonal sweeps


def qp_diagonal(n, t, count=op_mod.DEFAULT_COUNT):
    """(q_n(t), p_n(t)) from a resolvent on (t, inf)."""
    grid = default_grid(n, t, count)
    res = discretize_n(n, grid)
    x = grid.nodes
    f, g = scaled_pair(n, x)
    sol = op_mod.resolvent_apply(res, np.stack([f, g], axis=1))
    kt = kernel_n(n, np.full_like(x, t), x) * grid.weights
    ft, gt = scaled_pair(n, float(t))
    return float(ft + kt @ sol[:, 0]), float(gt + kt @ sol[:, 1])


def R_n_pair(ctx, x, y):
    """R_n(x, y; t) at arbitrary points (rho K form, extended in x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = ctx.nodes
    col = op_mod.resolvent_apply(ctx.resolvent_n, kernel_n(ctx.n, nodes, np.full_like(nodes, y)))
    return ctx._extend(col, kernel_n(ctx.n, x, np.full_like(x, y)), x)
