"""Nystrom discretization of integral operators on (t, inf).

A kernel k is sampled on a quadrature grid with square-root weights,
``K_ij = sqrt(w_i) k(x_i, x_j) sqrt(w_j)``, so that symmetric kernels give
symmetric matrices.  Function tables passed in and out of this module are
plain samples ``f(x_i)``; the weighting is handled internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import AccuracyError, NumericError, ParameterError, SingularityError
from .specfun import QuadratureGrid, make_grid

DEFAULT_COUNT = 80
_PIVOT_FLOOR = 1e-13


@dataclass(frozen=True)
class DiscretizedOperator:
    """Weighted kernel matrix on a grid, with (I - K) factorized once."""

    grid: QuadratureGrid
    kernel_matrix: np.ndarray = field(repr=False)
    symmetric: bool = True
    _lu: tuple = field(repr=False, default=None, compare=False)

    @property
    def count(self):
        return self.grid.count

    @property
    def sqrt_weights(self):
        return np.sqrt(self.grid.weights)


def _factorize(kmat, symmetric):
    a = np.eye(len(kmat)) - kmat
    lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.diag(lu)
    smallest = float(np.min(np.abs(pivots)))
    if smallest < _PIVOT_FLOOR * max(1.0, float(np.max(np.abs(pivots)))):
        raise SingularityError(
            f"I - K is numerically singular (smallest pivot {smallest:.3e})",
            smallest_pivot=smallest,
        )
    if symmetric:
        # I - K positive definite <=> spectral radius of the (symmetric) K below 1
        # when K is itself positive semidefinite; we check definiteness directly.
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise SingularityError(
                "I - K is not positive definite: the kernel's spectral radius reaches 1",
                smallest_pivot=smallest,
            ) from None
    return lu, piv


def from_matrix(grid, kernel_matrix, symmetric=True):
    """Wrap an already weighted kernel matrix."""
    kmat = np.array(kernel_matrix, dtype=float)
    if kmat.shape != (grid.count, grid.count):
        raise ParameterError("kernel matrix does not match the grid")
    kmat.setflags(write=False)
    return DiscretizedOperator(grid, kmat, symmetric, _factorize(kmat, symmetric))


def discretize(kernel, lower=None, count=DEFAULT_COUNT, map_kind="exponential", scale=1.0,
               grid=None, symmetric=True):
    """Sample ``kernel(x, y)`` (vectorized over broadcast arrays) on a grid.

    Either pass a prepared ``grid`` or ``lower``/``count``/``map_kind``/``scale``.
    """
    if grid is None:
        if lower is None:
            raise ParameterError("need either lower or grid")
        grid = make_grid(lower, count, map_kind, scale)
    x = grid.nodes
    vals = np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (grid.count, grid.count))
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise NumericError(f"kernel is not finite at node pair ({i}, {j}) = ({x[i]:.6g}, {x[j]:.6g})")
    sw = np.sqrt(grid.weights)
    kmat = sw[:, None] * vals * sw[None, :]
    if symmetric:
        kmat = 0.5 * (kmat + kmat.T)
    return from_matrix(grid, kmat, symmetric)


def fredholm_det(op):
    """det(I - K) from the LU pivots."""
    lu, piv = op._lu
    d = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(len(piv))))
    sign = (-1.0) ** swaps * np.prod(np.sign(d))
    return float(sign * math.exp(float(np.sum(np.log(np.abs(d))))))


def _check_table(op, f):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != op.count:
        raise ParameterError(f"table length {f.shape[0]} does not match grid size {op.count}")
    return f


def resolvent_apply(op, f):
    """``(I - K)^{-1} f`` at the nodes.  ``f`` may be (count,) or (count, m)."""
    f = _check_table(op, f)
    sw = op.sqrt_weights
    sw_b = sw if f.ndim == 1 else sw[:, None]
    y = sla.lu_solve(op._lu, sw_b * f, check_finite=False)
    return y / sw_b


def apply_kernel(op, f):
    """``(K f)(x_i)`` at the nodes."""
    f = _check_table(op, f)
    sw = op.sqrt_weights
    sw_b = sw if f.ndim == 1 else sw[:, None]
    return (op.kernel_matrix @ (sw_b * f)) / sw_b


def inner(f, g, grid):
    """L^2 inner product of two tables sampled on ``grid``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.ndim == 0 or g.ndim == 0 or f.shape[0] != grid.count or g.shape[0] != grid.count:
        raise ParameterError(
            f"tables of length {f.shape[0]} and {g.shape[0]} on a grid of {grid.count} nodes"
        )
    w = grid.weights
    if f.ndim == 1 and g.ndim == 1:
        return float(np.dot(w, f * g))
    return np.einsum("i,i...,i...->...", w, f, g)


def extend(op, kernel, values_at_nodes, free_term, x):
    """Nystrom interpolation of the solution of (I - K) y = f at off-grid points.

    ``y(x) = f(x) + sum_j k(x, x_j) w_j y(x_j)``; ``free_term`` is f evaluated
    at ``x``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = _check_table(op, values_at_nodes)
    kx = np.asarray(kernel(x[:, None], op.grid.nodes[None, :]), dtype=float)
    return np.asarray(free_term, dtype=float) + kx @ (op.grid.weights * y)


def converged_det(build, start=DEFAULT_COUNT, tol=1e-10, max_count=1280):
    """Double the grid size until two successive determinants agree to ``tol``.

    ``build(count)`` must return a DiscretizedOperator.  Returns
    ``(det, count)`` where ``count`` is the finer of the final pair.
    """
    prev = fredholm_det(build(start))
    count = start
    diff = math.inf
    while 2 * count <= max_count:
        count *= 2
        cur = fredholm_det(build(count))
        diff = abs(cur - prev)
        if diff <= tol:
            return cur, count
        prev = cur
    raise AccuracyError(
        f"determinant did not self-converge to {tol} by {count} nodes (last change {diff:.2e})",
        achieved=diff,
    )


def resolvent_kernel(op):
    """Kernel of R = (I - K)^{-1} K at node pairs (unweighted)."""
    lu = op._lu
    sw = op.sqrt_weights
    y = sla.lu_solve(lu, op.kernel_matrix, check_finite=False)
    return y / (sw[:, None] * sw[None, :])
