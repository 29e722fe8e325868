import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtedge import ParameterError
from rmtedge import finite_n as fin
from rmtedge import montecarlo as mc


def test_gue_single_eigenvalue_is_gaussian():
    N = 200_000
    run = mc.sample(1, 2, seed=7, num_samples=N)
    x = np.asarray(run.sorted_lambda_max)
    sigma = math.sqrt(0.5)
    assert abs(x.mean()) < 4 * sigma / math.sqrt(N)
    # var of the sample variance for a Gaussian is 2 sigma^4 / (N - 1)
    assert abs(x.var(ddof=1) - 0.5) < 4 * math.sqrt(2 * sigma**4 / (N - 1))


@pytest.mark.parametrize("beta, variance", [(1, 1.0), (4, 0.25)])
def test_single_eigenvalue_scale_other_betas(beta, variance):
    N = 100_000
    x = np.asarray(mc.sample(1, beta, seed=3, num_samples=N).sorted_lambda_max)
    assert abs(x.var(ddof=1) - variance) < 4 * math.sqrt(2 * variance**2 / (N - 1))


def test_run_invariants():
    run = mc.sample(4, 1, seed=99, num_samples=5000)
    x = np.asarray(run.sorted_lambda_max)
    assert len(x) == 5000 and np.all(np.diff(x) >= 0)
    assert (run.n, run.beta, run.seed, run.num_samples) == (4, 1, 99, 5000)


@pytest.mark.parametrize("beta", mc.BETAS)
def test_deterministic_across_threads(beta):
    a = mc.sample(3, beta, seed=12345, num_samples=3 * mc.CHUNK + 17, threads=1)
    b = mc.sample(3, beta, seed=12345, num_samples=3 * mc.CHUNK + 17, threads=4)
    c = mc.sample(3, beta, seed=12345, num_samples=3 * mc.CHUNK + 17)
    assert np.array_equal(a.sorted_lambda_max, b.sorted_lambda_max)
    assert np.array_equal(a.sorted_lambda_max, c.sorted_lambda_max)


def test_different_seeds_differ():
    a = mc.sample(2, 2, seed=1, num_samples=100)
    b = mc.sample(2, 2, seed=2, num_samples=100)
    assert not np.array_equal(a.sorted_lambda_max, b.sorted_lambda_max)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("RMT_THREADS", "3")
    assert mc.thread_count() == 3


def test_gue_n2_probability_below_zero():
    run = mc.sample(2, 2, seed=2024, num_samples=100_000)
    cdf = mc.empirical_cdf(run, [0.0])
    assert abs(cdf.F[0] - fin.F_n2(2, 0.0)) <= cdf.band


@pytest.mark.parametrize("n", [1, 2, 5])
def test_sup_distance_within_band(n):
    run = mc.sample(n, 2, seed=77 + n, num_samples=50_000)
    d = mc.sup_distance(run, lambda t: fin.F_n2(n, t))
    assert d <= mc.dkw_band(run.num_samples, 0.99)


def test_empirical_cdf_edges():
    run = mc.sample(3, 2, seed=5, num_samples=1000)
    lo, hi = run.sorted_lambda_max[0], run.sorted_lambda_max[-1]
    cdf = mc.empirical_cdf(run, [lo - 1.0, hi + 1.0])
    assert list(cdf.F) == [0.0, 1.0]
    assert cdf.band == pytest.approx(mc.dkw_band(1000), rel=1e-15)


def test_dkw_band_value():
    assert mc.dkw_band(200_000, 0.99) == pytest.approx(0.00364, abs=5e-6)
    with pytest.raises(ParameterError):
        mc.dkw_band(100, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10**6), st.floats(0.5, 0.999))
def test_dkw_band_monotone(N, conf):
    assert mc.dkw_band(N + 1, conf) < mc.dkw_band(N, conf)
    assert mc.dkw_band(N, conf) < mc.dkw_band(N, min(conf + 1e-3, 0.9995))


@pytest.mark.parametrize("kwargs", [
    dict(n=101, beta=2, seed=0, num_samples=10),
    dict(n=0, beta=2, seed=0, num_samples=10),
    dict(n=2, beta=3, seed=0, num_samples=10),
    dict(n=2, beta=2, seed=-1, num_samples=10),
    dict(n=2, beta=2, seed=0, num_samples=10**7 + 1),
    dict(n=2, beta=2, seed=0, num_samples=0),
])
def test_parameter_errors(kwargs):
    with pytest.raises(ParameterError):
        mc.sample(**kwargs)
