"""Monte-Carlo sampling of the largest eigenvalue of small Gaussian ensembles.

Variances follow the weight exp(-(beta/2) sum x^2) on the eigenvalues, so
that for n = 1, beta = 2 the single eigenvalue has density
pi^{-1/2} exp(-x^2).  Sampling is split into fixed-size chunks, each with its
own Philox stream keyed by (seed, beta, n, chunk index); results therefore do
not depend on how many worker threads run the chunks.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError

MAX_N = 100
MAX_SAMPLES = 10**7
CHUNK = 4096
BETAS = (1, 2, 4)


@dataclass(frozen=True)
class SampleRun:
    n: int
    beta: int
    seed: int
    num_samples: int
    sorted_lambda_max: np.ndarray = field(repr=False)


def thread_count():
    """Worker threads, capped by RMT_THREADS when set."""
    env = os.environ.get("RMT_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ParameterError(f"RMT_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ParameterError("RMT_THREADS must be at least 1")
        return cap
    return min(8, os.cpu_count() or 1)


def _hermitian_parts(rng, m, size, diag_var, off_var, complex_off):
    """Batch of m x m Hermitian (or real symmetric) matrices."""
    a = rng.normal(scale=math.sqrt(off_var), size=(size, m, m))
    if complex_off:
        a = a + 1j * rng.normal(scale=math.sqrt(off_var), size=(size, m, m))
    h = np.triu(a, 1)
    h = h + np.conj(np.swapaxes(h, 1, 2))
    idx = np.arange(m)
    h[:, idx, idx] = rng.normal(scale=math.sqrt(diag_var), size=(size, m))
    return h


def _quaternion_batch(rng, n, size):
    """2n x 2n complex form of self-dual quaternion matrices with weight exp(-tr M^2)."""
    # off-diagonal quaternion components have variance 1/8, real diagonal 1/4
    z = rng.normal(scale=math.sqrt(1 / 8), size=(size, n, n)) + 1j * rng.normal(
        scale=math.sqrt(1 / 8), size=(size, n, n))
    w = rng.normal(scale=math.sqrt(1 / 8), size=(size, n, n)) + 1j * rng.normal(
        scale=math.sqrt(1 / 8), size=(size, n, n))
    z = np.triu(z, 1)
    w = np.triu(w, 1)
    z = z + np.conj(np.swapaxes(z, 1, 2))
    w = w - np.swapaxes(w, 1, 2)
    idx = np.arange(n)
    z[:, idx, idx] = rng.normal(scale=0.5, size=(size, n))
    top = np.concatenate([z, w], axis=2)
    bottom = np.concatenate([-np.conj(w), np.conj(z)], axis=2)
    return np.concatenate([top, bottom], axis=1)


def _chunk_max(n, beta, seed, index, size):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(beta, n, index))
    rng = np.random.Generator(np.random.Philox(ss))
    if beta == 1:
        mats = _hermitian_parts(rng, n, size, 1.0, 0.5, False)
    elif beta == 2:
        mats = _hermitian_parts(rng, n, size, 0.5, 0.25, True)
    else:
        mats = _quaternion_batch(rng, n, size)
    # eigenvalues of the quaternion form come in equal pairs; the top one suffices
    return np.linalg.eigvalsh(mats)[:, -1]


def sample(n, beta, seed, num_samples, threads=None):
    """Draw ``num_samples`` largest eigenvalues; reproducible from the arguments alone."""
    if int(n) != n or not 1 <= n <= MAX_N:
        raise ParameterError(f"n must be an integer in 1..{MAX_N}")
    if beta not in BETAS:
        raise ParameterError("beta must be 1, 2 or 4")
    if int(num_samples) != num_samples or not 1 <= num_samples <= MAX_SAMPLES:
        raise ParameterError(f"num_samples must lie in 1..{MAX_SAMPLES}")
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise ParameterError("seed must be a 64-bit unsigned integer")
    n, beta, seed, num_samples = int(n), int(beta), int(seed), int(num_samples)
    sizes = [min(CHUNK, num_samples - k) for k in range(0, num_samples, CHUNK)]
    workers = threads or thread_count()
    jobs = [(n, beta, seed, i, sz) for i, sz in enumerate(sizes)]
    if workers == 1 or len(jobs) == 1:
        parts = [_chunk_max(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _chunk_max(*j), jobs))
    lam = np.sort(np.concatenate(parts))
    lam.setflags(write=False)
    return SampleRun(n, beta, seed, num_samples, lam)


def dkw_band(num_samples, confidence=0.99):
    """Half-width of the two-sided DKW band."""
    if not 0 < confidence < 1:
        raise ParameterError("confidence must lie in (0, 1)")
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * num_samples))


@dataclass(frozen=True)
class EmpiricalCDF:
    t: np.ndarray
    F: np.ndarray
    band: float


def empirical_cdf(run, t_grid, confidence=0.99):
    """Right-continuous empirical CDF at ``t_grid`` with its DKW half-width."""
    t = np.asarray(t_grid, dtype=float)
    F = np.searchsorted(run.sorted_lambda_max, t, side="right") / run.num_samples
    return EmpiricalCDF(t, F, dkw_band(run.num_samples, confidence))


def sup_distance(run, cdf, nodes=None):
    """Kolmogorov distance between the empirical CDF and a continuous ``cdf``.

    ``cdf`` is evaluated exactly on ``nodes`` (default: 241 points spanning the
    sample range) and interpolated by a cubic spline at the sample points.
    """
    x = run.sorted_lambda_max
    if nodes is None:
        nodes = np.linspace(x[0] - 1e-9, x[-1] + 1e-9, 241)
    vals = np.array([cdf(v) for v in nodes])
    Fx = np.clip(CubicSpline(nodes, vals)(x), 0.0, 1.0)
    N = len(x)
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - Fx), np.max(Fx - (i - 1) / N)))
