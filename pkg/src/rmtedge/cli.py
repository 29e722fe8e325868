"""Command-line front end producing CSV tables.

Subcommands
-----------
table      finite-n and Airy quantities on a t- or s-grid
verify     acceptance suites, one row per criterion
mc         empirical CDF of the largest eigenvalue with DKW band
expansion  large-n expansions evaluated on an s- or X-grid

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import acceptance
from . import airy_system as airy_mod
from . import asymptotics as asy
from . import finite_n as fin
from . import montecarlo as mc
from .errors import CapabilityError, DomainError, NumericError, ParameterError
from .specfun import ScalingParams, hermite_phi, tau

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# options whose values may start with '-' (negative grids and points)
_VALUE_FLAGS = ("--t-grid", "--s-grid", "--t", "--s", "--x")

TABLE_COLUMNS = {
    "fn2": "n, t, F_n2",
    "eps": "n, t, u/vtilde/q by quadrature, the same by closed form, max_abs_diff",
    "calligraphic": "n, t, ensemble, Q/P/R by quadrature, the same by closed form, max_abs_diff",
    "airy": "s, F2, q_resolvent, q_painleve, mu",
}


class UsageError(Exception):
    pass


def parse_grid(text):
    """'lo:hi:step' -> inclusive grid; a bare number gives a single point."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected lo:hi:step") from None
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3:
        raise UsageError(f"bad grid {text!r}; expected lo:hi:step")
    lo, hi, step = vals
    if not all(map(math.isfinite, vals)) or step <= 0:
        raise UsageError(f"grid {text!r} needs finite bounds and a positive step")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise UsageError(f"grid {text!r} is empty")
    return lo + step * np.arange(count)


def parse_ints(text):
    try:
        vals = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise UsageError("--n needs positive integers")
    return vals


def parse_tol(items):
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--tol value for {name} is not a number") from None
    return out


def _join_negative_values(argv):
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(stream, header, rows, config):
    stream.write(f"# rmtedge {__version__}\n")
    stream.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _pmap(fn, items):
    items = list(items)
    workers = mc.thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def _points(args, need):
    """Evaluation points as (n, t) pairs from --t/--t-grid or --s/--s-grid (t = tau(s))."""
    if args.t_grid is not None or args.t is not None:
        ts = parse_grid(args.t_grid if args.t_grid is not None else args.t)
        return [(n, float(t), None) for n in args.n for t in ts]
    if args.s_grid is not None or args.s is not None:
        ss = parse_grid(args.s_grid if args.s_grid is not None else args.s)
        return [(n, float(tau(ScalingParams(n, args.c), s)), float(s)) for n in args.n for s in ss]
    raise UsageError(f"{need} needs --t, --t-grid, --s or --s-grid")


# ---------------------------------------------------------------------------
# commands


def cmd_table(args):
    kind = args.kind
    if kind == "airy":
        if args.s_grid is None and args.s is None:
            raise UsageError("table --airy needs --s or --s-grid")
        ss = parse_grid(args.s_grid if args.s_grid is not None else args.s)

        def row(s):
            return (s, airy_mod.airy_det(s), airy_mod.q_diagonal(s, args.grid_size),
                    airy_mod.painleve_q(s), airy_mod.mu(s))

        return ["s", "F2", "q_resolvent", "q_painleve", "mu"], _pmap(row, ss)
    args.n = parse_ints(args.n_text or "1")
    pts = _points(args, f"table --{kind}")
    if kind == "fn2":
        return ["n", "t", "F_n2"], _pmap(lambda p: (p[0], p[1], fin.F_n2(p[0], p[1], args.grid_size)), pts)
    if kind == "eps":
        def row(p):
            n, t, _ = p
            ctx = fin.build_finite_context(n, t, i_max=0, count=args.grid_size)
            e = fin.eps_functionals(ctx)
            cf = asy.closed_form_eps(asy.ab_integrals(n, t, count=args.grid_size), fin.c_phi_any(n))
            quad = (e.u, e.vtilde, e.q)
            closed = (cf.u, cf.vtilde, cf.q)
            return (n, t) + quad + closed + (max(abs(a - b) for a, b in zip(quad, closed)),)

        header = ["n", "t", "u_quad", "vtilde_quad", "q_quad", "u_closed", "vtilde_closed",
                  "q_closed", "max_abs_diff"]
        return header, _pmap(row, pts)
    if kind == "calligraphic":
        def row(p):
            n, t, _ = p
            ens = "GOE" if n % 2 == 0 else "GSE"
            ctx = fin.build_finite_context(n, t, i_max=0, count=args.grid_size)
            cal = fin.calligraphic(ctx, ens)
            const = fin.c_phi(n) if ens == "GOE" else fin.c_psi(n)
            cf = asy.closed_form_calligraphic(asy.ab_integrals(n, t, count=args.grid_size), ens, const)
            quad = (cal.Q, cal.P, cal.R)
            closed = (cf.Q, cf.P, cf.R)
            return (n, t, ens) + quad + closed + (max(abs(a - b) for a, b in zip(quad, closed)),)

        header = ["n", "t", "ensemble", "Q_quad", "P_quad", "R_quad", "Q_closed", "P_closed",
                  "R_closed", "max_abs_diff"]
        return header, _pmap(row, pts)
    raise UsageError(f"unknown table kind {kind!r}")


def cmd_verify(args):
    tol = parse_tol(args.tol)
    only = []
    for item in args.only or ():
        only.extend(x for x in item.split(",") if x)
    for name in only:
        if name not in acceptance.CRITERIA:
            raise UsageError(f"unknown suite {name!r}; known: {', '.join(acceptance.CRITERIA)}")
    acceptance.resolve_tolerances(tol)
    results = acceptance.run_all(only or None, tol)
    rows = [(r.id, r.passed, r.measured, r.threshold, r.seconds, r.detail) for r in results]
    failed = [r.id for r in results if not r.passed]
    for r in results:
        print(r.line(), file=sys.stderr)
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
    return ["criterion", "passed", "measured", "threshold", "seconds", "detail"], rows, \
        (EXIT_VERIFY if failed else EXIT_OK)


def cmd_mc(args):
    ns = parse_ints(args.n_text or "1")
    seed = args.seed if args.seed is not None else acceptance.MC_SEED
    samples = args.samples if args.samples is not None else acceptance.MC_SAMPLES
    rows = []
    for n in ns:
        run = mc.sample(n, args.beta, seed, samples)
        if args.t_grid is not None or args.t is not None:
            ts = parse_grid(args.t_grid if args.t_grid is not None else args.t)
        else:
            x = run.sorted_lambda_max
            ts = np.linspace(x[0], x[-1], 101)
        cdf = mc.empirical_cdf(run, ts, args.confidence)
        exact = _pmap(lambda t, n=n: fin.F_n2(n, t), ts) if args.with_exact else None
        for i, t in enumerate(ts):
            row = [n, args.beta, t, cdf.F[i], max(0.0, cdf.F[i] - cdf.band),
                   min(1.0, cdf.F[i] + cdf.band), cdf.band]
            if exact is not None:
                row.append(exact[i])
            rows.append(row)
    header = ["n", "beta", "t", "F_hat", "dkw_lower", "dkw_upper", "band"]
    if args.with_exact:
        header.append("F_n2")
    return header, rows


def cmd_expansion(args):
    ns = parse_ints(args.n_text or "100")
    kind = args.kind
    if kind == "theorem":
        if args.s_grid is None and args.s is None:
            raise UsageError("expansion --theorem needs --s or --s-grid")
        ss = parse_grid(args.s_grid if args.s_grid is not None else args.s)
        nu_mode = args.nu
        rows = []
        for n in ns:
            params = ScalingParams(n, args.c)
            for s in ss:
                nu = _resolve_nu(nu_mode, s, args.order)
                th = asy.theorem_expansions(s, params, args.order, nu=nu)
                rows.append([n, args.c, s, args.order] + [th.value(k) for k in asy.THEOREM_FUNCTIONS])
        return ["n", "c", "s", "order"] + list(asy.THEOREM_FUNCTIONS), rows
    if args.x_grid is None:
        raise UsageError(f"expansion --{kind} needs --x (a point or lo:hi:step grid)")
    xs = parse_grid(args.x_grid)
    rows = []
    for n in ns:
        params = ScalingParams(n, args.c)
        for x in xs:
            if kind == "phi":
                ev = asy.phi_expansion(params, x)
                exact = (n / 2) ** 0.25 * hermite_phi(n, tau(params, x))
            else:
                y = x if args.y is None else args.y
                ev = asy.kernel_expansion(params, x, y)
                exact = params.width * fin.kernel_n(n, tau(params, x), tau(params, y))
            rows.append([n, args.c, x, ev.value(0), ev.value(1), ev.value(2), exact])
    return ["n", "c", "x", "order0", "order1", "order2", "exact"], rows


def _resolve_nu(mode, s, order):
    if order == 0:
        return None
    if mode is None:
        raise CapabilityError(
            "orders 1 and 2 need nu(s), which has no published definition; pass --nu VALUE "
            "or --nu identify (fits it from finite-n data) or --nu int_p")
    if mode == "identify":
        return asy.identify_nu(s).nu_empirical
    if mode == "int_p":
        return asy.airy_sweep_integrals(s)["p"]
    try:
        return float(mode)
    except ValueError:
        raise UsageError("--nu must be a number, 'identify' or 'int_p'") from None


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="rmtedge", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"rmtedge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def shared(sp):
        sp.add_argument("--n", dest="n_text", help="matrix size(s), comma separated")
        sp.add_argument("--c", type=float, default=0.0, help="edge shift c (default 0)")
        sp.add_argument("--grid-size", type=int, default=80, help="quadrature nodes (default 80)")
        sp.add_argument("--t", help="single t value")
        sp.add_argument("--t-grid", help="t grid lo:hi:step (inclusive)")
        sp.add_argument("--s", help="single s value")
        sp.add_argument("--s-grid", help="s grid lo:hi:step; t = tau(s) for finite-n tables")
        sp.add_argument("--seed", type=int, help="Monte-Carlo seed")
        sp.add_argument("--samples", type=int, help="Monte-Carlo sample count")
        sp.add_argument("--out", help="output CSV path (default stdout)")
        sp.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")
        sp.add_argument("--only", action="append", metavar="SUITE", help="run only these suites")

    cols = "\n".join(f"  --{k}: {v}" for k, v in TABLE_COLUMNS.items())
    t = sub.add_parser("table", help="finite-n and Airy tables",
                       description=f"CSV columns:\n{cols}",
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g = t.add_mutually_exclusive_group(required=True)
    for k in TABLE_COLUMNS:
        g.add_argument(f"--{k}", dest="kind", action="store_const", const=k)
    shared(t)

    v = sub.add_parser("verify", help="acceptance suites",
                       description="CSV columns: criterion, passed, measured, threshold, seconds, "
                                   "detail.  Suites: " + ", ".join(acceptance.CRITERIA)
                                   + ".  Tolerances: " + ", ".join(acceptance.DEFAULT_TOLERANCES))
    shared(v)

    m = sub.add_parser("mc", help="Monte-Carlo empirical CDF",
                       description="CSV columns: n, beta, t, F_hat, dkw_lower, dkw_upper, band "
                                   "[, F_n2 with --with-exact]")
    shared(m)
    m.add_argument("--beta", type=int, default=2, choices=mc.BETAS)
    m.add_argument("--confidence", type=float, default=0.99)
    m.add_argument("--with-exact", action="store_true", help="add the F_n2 column (beta = 2)")

    e = sub.add_parser("expansion", help="large-n expansions",
                       description="--phi/--kernel columns: n, c, x, order0, order1, order2, exact.\n"
                                   "--theorem columns: n, c, s, order and one per function.",
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g = e.add_mutually_exclusive_group(required=True)
    for k in ("phi", "kernel", "theorem"):
        g.add_argument(f"--{k}", dest="kind", action="store_const", const=k)
    shared(e)
    e.add_argument("--x", dest="x_grid", help="X point or grid for --phi/--kernel")
    e.add_argument("--y", type=float, help="second argument for --kernel (default Y = X)")
    e.add_argument("--order", type=int, default=0, choices=(0, 1, 2))
    e.add_argument("--nu", help="nu(s) for orders 1-2: a number, 'identify' or 'int_p'")
    return p


def _validate(args):
    if args.grid_size < 8:
        raise UsageError("--grid-size must be at least 8")
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be positive")
    if args.seed is not None and args.seed < 0:
        raise UsageError("--seed must be non-negative")
    if not math.isfinite(args.c):
        raise UsageError("--c must be finite")


def main(argv=None):
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items()}
    try:
        _validate(args)
        code = EXIT_OK
        if args.command == "table":
            header, rows = cmd_table(args)
        elif args.command == "verify":
            header, rows, code = cmd_verify(args)
        elif args.command == "mc":
            header, rows = cmd_mc(args)
        else:
            header, rows = cmd_expansion(args)
    except (UsageError, ParameterError, DomainError, CapabilityError) as exc:
        print(f"rmtedge {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"rmtedge {args.command}: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(fh, header, rows, config)
    else:
        write_csv(sys.stdout, header, rows, config)
    return code


if __name__ == "__main__":
    sys.exit(main())
