"""Acceptance suites: each returns a CriterionResult with the measured figure.

Tolerances live in DEFAULT_TOLERANCES and can be overridden by name
(the CLI exposes this as ``--tol NAME=VALUE``).  A suite never adjusts its
own thresholds; a failing suite reports the measured value instead.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import airy_system as airy_mod
from . import asymptotics as asy
from . import finite_n as fin
from . import montecarlo as mc
from . import operator as op_mod
from .errors import ParameterError
from .specfun import ScalingParams, airy, make_grid, tau

DEFAULT_TOLERANCES = {
    "closed_form_rel": 1e-6,
    "closed_form_abs": 1e-8,
    "ode_residual": 1e-6,
    "ode_boundary": 1e-6,
    "kernel_slope": 0.15,
    "hm_diff": 1e-6,
    "hm_ratio_low": 1e-6,
    "hm_ratio_high": 1e-3,
    "rank_one": 1e-12,
    "gaussian_n1": 1e-10,
    "det_doubling": 1e-9,
    "identity": 1e-8,
    "mc_confidence": 0.99,
    "theorem_algebraic": 1e-10,
    "theorem_slope": 0.15,
    "nu_levels": 1e-3,
    "c_phi": 1e-10,
}

S_WINDOW = tuple(np.round(np.arange(-3.0, 2.0 + 1e-9, 0.5), 10))
GOE_SIZES = (2, 4, 6, 8)
GSE_SIZES = (3, 5, 7)


@dataclass(frozen=True)
class CriterionResult:
    id: str
    passed: bool
    measured: float
    threshold: float
    detail: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.id}: measured={self.measured:.3e} threshold={self.threshold:.3e}"
                f" ({self.detail}) [{self.seconds:.1f}s]")


def resolve_tolerances(overrides=None):
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (overrides or {}).items():
        if key not in tol:
            raise ParameterError(f"unknown tolerance {key!r}; known: {', '.join(sorted(tol))}")
        value = float(value)
        if not value > 0 or not math.isfinite(value):
            raise ParameterError(f"tolerance {key} must be positive and finite")
        tol[key] = value
    return tol


def _slope(ns, errs):
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def _scaled_error(ref, val, rel, abs_):
    """Error in units of the applicable tolerance: relative above 1e-2, absolute below."""
    err = abs(val - ref)
    return err / (rel * abs(ref)) if abs(ref) >= 1e-2 else err / abs_


# ---------------------------------------------------------------------------
# 1. closed forms against quadrature


def closed_form(tol):
    worst, where = 0.0, ""
    for n in GOE_SIZES + GSE_SIZES:
        for s in S_WINDOW:
            t = tau(ScalingParams(n, 0.0), s)
            ref = asy.exact_theorem_values(n, t, "quadrature")
            got = asy.exact_theorem_values(n, t, "closed")
            for key in ref:
                e = _scaled_error(ref[key], got[key], tol["closed_form_rel"], tol["closed_form_abs"])
                if e > worst:
                    worst, where = e, f"{key} n={n} s={s}: quad={ref[key]:.6g} closed={got[key]:.6g}"
    return worst <= 1.0, worst, 1.0, f"error in tolerance units, worst {where}"


# ---------------------------------------------------------------------------
# 2. ODE residuals of the closed-form triples


def _triple(system, n, pair, c_phi, c_psi):
    if system == "eps":
        e = asy.closed_form_eps(pair, c_phi)
        return np.array([e.u, e.V, e.q])
    cal = asy.closed_form_calligraphic(pair, system, c_phi if system == "GOE" else c_psi)
    return np.array([cal.Q, cal.P, cal.R_tilde])


def _derivative(f, t, h0, floor=1e-5):
    """Richardson-improved central difference, halving h until two estimates agree."""
    def central(h):
        return (f(t + h) - f(t - h)) / (2 * h)

    h = h0
    prev = (4 * central(h / 2) - central(h)) / 3
    while h > floor:
        h /= 2
        cur = (4 * central(h / 2) - central(h)) / 3
        if np.max(np.abs(cur - prev)) < 1e-9:
            return cur
        prev = cur
    return prev


def ode_residual(tol):
    worst, where = 0.0, ""
    boundary_worst = 0.0
    for n in GOE_SIZES + GSE_SIZES:
        params = ScalingParams(n, 0.0)
        cphi = fin.c_phi_any(n)
        cpsi = fin.c_psi(n) if n % 2 else 0.0
        systems = ("eps", "GOE" if n % 2 == 0 else "GSE")
        far = asy.ab_integrals(n, tau(params, 8.0))
        for system in systems:
            target = asy.boundary_vector(system, cphi, cpsi)
            boundary_worst = max(boundary_worst,
                                 float(np.max(np.abs(_triple(system, n, far, cphi, cpsi) - target))))
        for s in S_WINDOW:
            t = tau(params, s)
            base = asy.ab_integrals(n, t)
            q, p = fin.qp_diagonal(n, t)
            for system in systems:
                def y(x, system=system):
                    return _triple(system, n, asy.ab_shift(n, base, x), cphi, cpsi)

                dy = _derivative(y, t, 0.02 * params.width)
                r = float(np.max(np.abs(dy - asy.ode_matrix(system, q, p) @ y(t))))
                if r > worst:
                    worst, where = r, f"{system} n={n} s={s}"
    passed = worst <= tol["ode_residual"] and boundary_worst <= tol["ode_boundary"]
    return passed, worst, tol["ode_residual"], f"worst residual at {where}; boundary error {boundary_worst:.1e}"


# ---------------------------------------------------------------------------
# 3. kernel expansion order


def kernel_order(tol):
    ns = (100, 200, 400)
    pts = np.linspace(-3.0, 2.0, 11)
    X, Y = np.meshgrid(pts, pts)
    X, Y = X.ravel(), Y.ravel()
    two, three = [], []
    for n in ns:
        params = ScalingParams(n, 0.0)
        exact = params.width * fin.kernel_n(n, tau(params, X), tau(params, Y))
        ev = asy.kernel_expansion(params, X, Y)
        two.append(np.max(np.abs(exact - ev.value(1))))
        three.append(np.max(np.abs(exact - ev.value(2))))
    s2, s3 = _slope(ns, two), _slope(ns, three)
    dev = max(abs(s3 + 1.0), abs(s2 + 2.0 / 3.0))
    return dev <= tol["kernel_slope"], dev, tol["kernel_slope"], \
        f"three-term slope {s3:.3f} (target -1), two-term slope {s2:.3f} (target -2/3)"


# ---------------------------------------------------------------------------
# 4. Hastings-McLeod against the resolvent diagonal


def hastings_mcleod(tol):
    table = airy_mod.hastings_mcleod(-6.0, 4.0, 0.25)
    diffs = [abs(q - airy_mod.q_diagonal(s)) for s, q in zip(table.s, table.q)]
    i = int(np.argmax(diffs))
    ratios = [airy_mod.painleve_q(s) / airy(s)[0] for s in np.linspace(4.0, 6.0, 9)]
    lo, hi = min(ratios), max(ratios)
    ratio_ok = lo >= 1 - tol["hm_ratio_low"] and hi <= 1 + tol["hm_ratio_high"]
    return diffs[i] <= tol["hm_diff"] and ratio_ok, diffs[i], tol["hm_diff"], \
        f"worst at s={table.s[i]:.2f}; q/Ai on [4,6] in [{lo:.9f}, {hi:.9f}]"


# ---------------------------------------------------------------------------
# 5. Fredholm engine


def fredholm(tol):
    # rank-one kernel e^{-x} e^{-y} on (0, inf): det = 1 - 1/2
    op = op_mod.discretize(lambda x, y: np.exp(-x - y), lower=0.0, count=80)
    e_rank = abs(op_mod.fredholm_det(op) - 0.5)
    e_gauss = abs(fin.F_n2(1, 0.0) - 0.5)
    e_double = 0.0
    for s in (-2.0, 0.0, 2.0):
        d1 = op_mod.fredholm_det(airy_mod._resolvent_at(s, 80))
        d2 = op_mod.fredholm_det(airy_mod._resolvent_at(s, 160))
        e_double = max(e_double, abs(d1 - d2))
    units = max(e_rank / tol["rank_one"], e_gauss / tol["gaussian_n1"], e_double / tol["det_doubling"])
    return units <= 1.0, units, 1.0, \
        f"error in tolerance units; rank-one {e_rank:.1e}, F(1,0) {e_gauss:.1e}, doubling {e_double:.1e}"


# ---------------------------------------------------------------------------
# 6. recurrence and inner-product identities


def identities(tol):
    worst, worst_fixed, where = 0.0, 0.0, ""
    for s in (-2.0, -0.5, 0.0, 1.0):
        ctx = airy_mod.build_context(s, i_max=4, with_mu=False)
        for k in (1, 2):
            rec = airy_mod.recurrence_check(ctx, k)
            rep = airy_mod.inner_product_identities(ctx, k, "displayed")
            fixed = airy_mod.inner_product_identities(ctx, k, "corrected")
            r = max(rec, rep.max_residual)
            worst_fixed = max(worst_fixed, rec, fixed.max_residual)
            if r > worst:
                worst, where = r, f"s={s} k={k} residuals {['%.1e' % x for x in rep.residuals]}"
    return worst <= tol["identity"], worst, tol["identity"], \
        f"worst {where}; with the sign-corrected X^2 Ai reduction {worst_fixed:.1e}"


# ---------------------------------------------------------------------------
# 7. Monte Carlo


MC_SEED = 20240517
MC_SAMPLES = 200_000


def monte_carlo(tol, seed=MC_SEED, samples=MC_SAMPLES):
    band = mc.dkw_band(samples, tol["mc_confidence"])
    worst, detail = 0.0, []
    for n in (1, 2, 5, 10):
        run = mc.sample(n, 2, seed, samples)
        d = mc.sup_distance(run, lambda v, n=n: fin.F_n2(n, v))
        detail.append(f"n={n}: {d:.5f}")
        worst = max(worst, d)
    return worst <= band, worst, band, "sup distances " + ", ".join(detail)


# ---------------------------------------------------------------------------
# 8. theorem leading orders


THEOREM_S = 0.0
RATE_C = 0.0
# the first-order coefficient of the GSE vtilde function is c q sinh(mu)/2, which
# vanishes at c = 0, so its n^{-1/3} rate is measured at c = 1/2
RATE_C_OVERRIDE = {"GSE_vtilde_eps": 0.5}


def _algebraic_gap(s):
    mu = airy_mod.mu(s)
    pair = asy.ABPair(mu / math.sqrt(2), mu / math.sqrt(2), math.inf)
    r2 = 2**-0.5
    e1 = asy.closed_form_eps(pair, r2)
    c1 = asy.closed_form_calligraphic(pair, "GOE", r2)
    e4 = asy.closed_form_eps(pair, 0.0)
    c4 = asy.closed_form_calligraphic(pair, "GSE", r2)
    got = {
        "GOE_u_eps": e1.u, "GOE_vtilde_eps": e1.vtilde, "GOE_q_eps": e1.q,
        "GOE_Q1": c1.Q, "GOE_P1": c1.P, "GOE_R1": c1.R,
        "GSE_u_eps": e4.u, "GSE_vtilde_eps": e4.vtilde, "GSE_q_eps": e4.q,
        "GSE_Q4": c4.Q, "GSE_P4": c4.P, "GSE_R4": c4.R,
    }
    lead = asy.leading_terms(mu)
    return max(abs(got[k] - lead[k]) for k in lead)


def theorem_rates(s=THEOREM_S):
    """Log-log slope of |exact - order-0 theorem| for every theorem function."""
    slopes = {}
    cache = {}
    for name in asy.THEOREM_FUNCTIONS:
        c = RATE_C_OVERRIDE.get(name, RATE_C)
        ns = (16, 64, 256) if name.startswith("GOE") else (17, 65, 257)
        errs = []
        for n in ns:
            params = ScalingParams(n, c)
            key = (n, c)
            if key not in cache:
                cache[key] = asy.exact_theorem_values(n, tau(params, s))
            lead = asy.theorem_expansions(s, params, 0).value(name)
            errs.append(abs(cache[key][name] - lead))
        slopes[name] = _slope(ns, errs)
    return slopes


def theorem_leading(tol):
    gap = max(_algebraic_gap(s) for s in (-2.0, 0.0, 1.5))
    slopes = theorem_rates()
    dev = {k: abs(v + 1.0 / 3.0) for k, v in slopes.items()}
    bad = max(dev, key=dev.get)
    passed = gap <= tol["theorem_algebraic"] and dev[bad] <= tol["theorem_slope"]
    return passed, dev[bad], tol["theorem_slope"], \
        f"algebraic gap {gap:.1e}; worst slope {bad}={slopes[bad]:.3f} (target -1/3)"


# ---------------------------------------------------------------------------
# 9. nu identification


def nu_identification(tol):
    rep = asy.identify_nu(0.0, tol=tol["nu_levels"])
    levels = rep.richardson
    gap = abs(levels[-1] - levels[-2])
    res = ", ".join(f"{k}: {v:+.2e}" for k, v in rep.residuals.items())
    return gap <= tol["nu_levels"], gap, tol["nu_levels"], \
        f"levels {['%.6f' % x for x in levels]}; nu={rep.nu_empirical:.6f}; best {rep.best}; residuals {res}"


# ---------------------------------------------------------------------------
# 10. c_phi


def c_phi_consistency(tol):
    ns = list(range(2, 21, 2))
    formula = [fin.c_phi(n) for n in ns]
    quad = [fin.c_phi_quadrature(n) for n in ns]
    worst = max(abs(a - b) for a, b in zip(formula, quad))
    limit = 2**-0.5
    gaps = [abs(limit - x) for x in formula]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    far = fin.c_phi(10**6)
    passed = worst <= tol["c_phi"] and monotone and abs(far - limit) < 1e-5
    return passed, worst, tol["c_phi"], \
        f"monotone approach {monotone}; c_phi(20)={formula[-1]:.10f}; c_phi(1e6)={far:.10f}"


CRITERIA = {
    "closed-form": closed_form,
    "ode-residual": ode_residual,
    "kernel-order": kernel_order,
    "hastings-mcleod": hastings_mcleod,
    "fredholm": fredholm,
    "identities": identities,
    "monte-carlo": monte_carlo,
    "theorem-leading": theorem_leading,
    "nu-identification": nu_identification,
    "c-phi": c_phi_consistency,
}


def run(name, tolerances=None):
    if name not in CRITERIA:
        raise ParameterError(f"unknown criterion {name!r}; known: {', '.join(CRITERIA)}")
    tol = resolve_tolerances(tolerances)
    start = time.perf_counter()
    passed, measured, threshold, detail = CRITERIA[name](tol)
    return CriterionResult(name, bool(passed), float(measured), float(threshold), detail,
                           time.perf_counter() - start)


def run_all(only=None, tolerances=None):
    names = list(CRITERIA) if not only else list(only)
    return [run(name, tolerances) for name in names]
