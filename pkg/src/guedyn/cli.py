"""Command-line frontend.

Subcommands reproduce the underlying data of every figure-type quantity as
CSV or JSON, with a sibling ``<out>.manifest.json`` recording the exact
configuration, so any data file can be regenerated bit-identically.

Exit codes: 0 success, 2 argument error, 3 numerical error, 4 self-check
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, haar, models, spectral, symgroup
from .errors import NumericalError
from .sim import RngStream, gap_statistics

ANALYTIC_KINDS = (
    "chi",
    "xi",
    "rho",
    "purity",
    "chi-poisson",
    "xi-poisson",
    "purity-poisson",
    "bessel",
)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_output(path, fmt, columns, rows, manifest):
    """Write the data file atomically plus its sibling manifest."""
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            if fmt == "csv":
                fh.write(",".join(col["name"] for col in columns) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(v) for v in row) + "\n")
            else:
                data = {
                    col["name"]: [
                        v if isinstance(v, str) else float(v) for v in col_vals
                    ]
                    for col, col_vals in zip(columns, zip(*rows))
                }
                json.dump({"columns": columns, "data": data}, fh, indent=1)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    with open(path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, default=str)
        fh.write("\n")


def _manifest(command, config, columns, wall_clock, **summary):
    out = {
        "tool": "guedyn",
        "version": __version__,
        "command": command,
        "config": config,
        "wall_clock_s": wall_clock,
        "columns": columns,
    }
    if summary:
        out["summary"] = summary
    return out


def _time_grid(t_max, dt):
    if dt <= 0 or t_max < dt:
        raise ValueError("need dt > 0 and t-max >= dt")
    return np.arange(0.0, t_max + 0.5 * dt, dt)


def _col(name, provenance, units="dimensionless"):
    return {"name": name, "provenance": provenance, "units": units}


def _pairs(args):
    da, db = args.dA or [], args.dB or []
    if len(da) != len(db) or not da:
        raise ValueError("--dA and --dB must be given the same number of times")
    return list(zip(da, db))


def run_analytic(args, config):
    t0 = time.time()
    kind = args.kind
    if kind == "bessel":
        times = _time_grid(args.t_max, args.dt)
        power = args.power
        cols = [_col("tau", "analytic", "sqrt(d)*time"), _col(f"bessel_pow{power}", "analytic")]
        rows = [[tau, spectral.bessel_limit(tau, power)] for tau in times]
    else:
        times = _time_grid(args.t_max, args.dt)
        cols = [_col("t", "analytic", "time, lambda=1 units")]
        series = []
        if kind in ("chi", "xi", "chi-poisson", "xi-poisson"):
            ds = args.d or []
            if not ds:
                raise ValueError(f"analytic {kind} requires --d")
            fn = {
                "chi": spectral.chi_mean,
                "xi": spectral.xi_mean,
                "chi-poisson": spectral.chi_poisson,
                "xi-poisson": spectral.xi_poisson,
            }[kind]
            for d in ds:
                cols.append(_col(f"{kind.replace('-', '_')}_d{d}", "analytic"))
                series.append([fn(d, t) for t in times])
        elif kind in ("rho", "purity", "purity-poisson"):
            for d_a, d_b in _pairs(args):
                if kind == "rho":
                    values = [spectral.rho_mean_coeffs(d_a, d_b, t) for t in times]
                    cols.append(_col(f"rho_p1_dA{d_a}_dB{d_b}", "analytic"))
                    cols.append(_col(f"rho_pmix_dA{d_a}_dB{d_b}", "analytic"))
                    series.append([v[0] for v in values])
                    series.append([v[1] for v in values])
                else:
                    fn = (
                        spectral.purity_mean
                        if kind == "purity"
                        else spectral.purity_poisson
                    )
                    cols.append(_col(f"{kind.replace('-', '_')}_dA{d_a}_dB{d_b}", "analytic"))
                    series.append([fn(d_a, d_b, t) for t in times])
        else:
            raise ValueError(f"unknown analytic kind {kind!r}")
        rows = [[t, *(s[i] for s in series)] for i, t in enumerate(times)]
    _write_output(
        args.out, args.format, cols, rows, _manifest("analytic", config, cols, time.time() - t0)
    )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _model_spec(args):
    couplings = {
        name: getattr(args, name)
        for name in ("J", "B", "J1", "J2", "J3")
        if getattr(args, name) is not None
    }
    return models.ModelSpec(args.model, args.dA_single, args.dB_single, couplings)


def run_montecarlo(args, config):
    t0 = time.time()
    spec = _model_spec(args)
    times = _time_grid(args.t_max, args.dt)
    result = models.ensemble_dynamics(
        spec,
        times,
        args.samples,
        RngStream(args.seed),
        threads=args.threads,
        scramble=args.scramble,
    )
    cols = [_col("t", "monte-carlo", "time, lambda=1 units")]
    series = []
    for i in range(spec.d_a):
        cols.append(_col(f"rho{i + 1}{i + 1}_mean", "monte-carlo"))
        cols.append(_col(f"rho{i + 1}{i + 1}_stderr", "monte-carlo"))
        series.append(result.rho_mean[:, i, i].real)
        series.append(result.rho_stderr[:, i, i])
    cols.append(_col("purity_mean", "monte-carlo"))
    cols.append(_col("purity_stderr", "monte-carlo"))
    series.append(result.purity_mean)
    series.append(result.purity_stderr)
    rows = [[t, *(s[i] for s in series)] for i, t in enumerate(times)]
    manifest = _manifest(
        "montecarlo",
        config,
        cols,
        time.time() - t0,
        n_samples=result.n_samples,
        energy_scale=result.energy_scale,
    )
    _write_output(args.out, args.format, cols, rows, manifest)
    print(f"wrote {args.out} ({len(rows)} rows, {args.samples} samples)")
    return 0


def run_gaps(args, config):
    t0 = time.time()
    spec = _model_spec(args)
    sampler = models.make_sampler(spec)
    spectra = [
        np.linalg.eigvalsh(sampler(RngStream(args.seed, i).generator()))
        for i in range(args.samples)
    ]
    stats = gap_statistics(spectra)
    counts, edges = np.histogram(stats.gaps, bins=args.bins)
    weights = counts / counts.sum()
    cols = [
        _col("bin_left", "monte-carlo", "mean-gap units"),
        _col("bin_right", "monte-carlo", "mean-gap units"),
        _col("weight", "monte-carlo"),
    ]
    rows = [
        [edges[i], edges[i + 1], weights[i]] for i in range(len(weights))
    ]
    manifest = _manifest(
        "gaps",
        config,
        cols,
        time.time() - t0,
        mean_ratio=stats.mean_ratio,
        mean_ratio_stderr=stats.mean_ratio_stderr,
        n_gaps=int(stats.gaps.size),
        n_skipped=stats.n_skipped,
    )
    _write_output(args.out, args.format, cols, rows, manifest)
    print(
        f"wrote {args.out}; mean gap ratio = {stats.mean_ratio:.4f} "
        f"+- {stats.mean_ratio_stderr:.4f}"
    )
    return 0


def run_distance(args, config):
    t0 = time.time()
    requested = args.models
    for fam in requested:
        if fam not in models.FAMILIES:
            raise ValueError(f"unknown model family {fam!r}")
    d_a, d_b = args.dA_single, args.dB_single
    times = _time_grid(6.0, args.dt)
    an_gue = models.analytic_gue_trace(d_a, d_b, times)
    an_poi = models.analytic_poisson_trace(d_a, d_b, times)
    couplings = {
        name: getattr(args, name)
        for name in ("J", "B", "J1", "J2", "J3")
        if getattr(args, name) is not None
    }

    ordered = ["GUE", "POISSON"] + [f for f in requested if f not in ("GUE", "POISSON")]
    traces = {}
    for idx, fam in enumerate(ordered):
        spec = models.ModelSpec(fam, d_a, d_b, couplings)
        result = models.ensemble_dynamics(
            spec,
            times,
            args.samples,
            RngStream(args.seed),
            threads=args.threads,
            stream_offset=idx * args.samples,
        )
        traces[fam] = models.DynamicsTrace.from_mc(result)
        print(f"{fam}: sampled {args.samples} systems")
    denom_gue = models.distance_d6(traces["GUE"], an_gue)
    denom_poi = models.distance_d6(traces["POISSON"], an_poi)
    cols = [
        _col("model", "monte-carlo"),
        _col("ratio_to_GUE", "monte-carlo"),
        _col("ratio_to_Poisson", "monte-carlo"),
    ]
    rows = []
    for fam in ordered:
        if fam not in requested:
            continue
        rows.append(
            [
                fam,
                models.distance_d6(traces[fam], an_gue) / denom_gue,
                models.distance_d6(traces[fam], an_poi) / denom_poi,
            ]
        )
    manifest = _manifest(
        "distance",
        config,
        cols,
        time.time() - t0,
        denominator_gue=denom_gue,
        denominator_poisson=denom_poi,
    )
    _write_output(args.out, args.format, cols, rows, manifest)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Self-check suite: exact identities plus the closed-form oracles.
# ---------------------------------------------------------------------------


def _selfcheck_table1():
    def denom(d, q):
        out = 1
        for z in range(q):
            out *= d * d - z * z
        return out

    numerators = {
        2: {(1, 1): lambda d: d * d, (2,): lambda d: -d},
        4: {
            (1, 1, 1, 1): lambda d: d**4 - 8 * d * d + 6,
            (2, 1, 1): lambda d: -(d**3) + 4 * d,
            (2, 2): lambda d: d * d + 6,
            (3, 1): lambda d: 2 * d * d - 3,
            (4,): lambda d: -5 * d,
        },
    }
    for q, table in numerators.items():
        ok = all(
            symgroup.weingarten(d, mu) == Fraction(num(d), denom(d, q))
            for d in range(4, 13)
            for mu, num in table.items()
        )
        yield f"table1 q={q}", ok, "exact" if ok else "MISMATCH"


def _selfcheck_table2():
    spec = haar.build_trace_moment_spec(2)
    expected_r = {
        (): (0, 0), ((1, 2),): (0, 1), ((1, 3),): (0, 0), ((1, 4),): (1, 0),
        ((2, 3),): (1, 0), ((2, 4),): (0, 0), ((3, 4),): (0, 1),
        ((1, 2, 3),): (0, 1), ((1, 3, 2),): (1, 0), ((1, 2, 4),): (0, 1),
        ((1, 4, 2),): (1, 0), ((1, 3, 4),): (0, 1), ((1, 4, 3),): (1, 0),
        ((2, 3, 4),): (0, 1), ((2, 4, 3),): (1, 0),
        ((1, 2), (3, 4)): (1, 2), ((1, 3), (2, 4)): (0, 0), ((1, 4), (2, 3)): (2, 1),
        ((1, 2, 3, 4),): (1, 2), ((1, 2, 4, 3),): (0, 1), ((1, 3, 2, 4),): (1, 0),
        ((1, 3, 4, 2),): (0, 1), ((1, 4, 2, 3),): (1, 0), ((1, 4, 3, 2),): (2, 1),
    }
    expected_q = {
        (): (-1, -1, 1, 1), ((1, 2),): (-1, 0, 1), ((1, 3),): (-2, 1, 1),
        ((1, 4),): (-1, 0, 1), ((2, 3),): (-1, 0, 1), ((2, 4),): (-1, -1, 2),
        ((3, 4),): (-1, 0, 1),
        ((1, 2, 3),): (-1, 1), ((1, 3, 2),): (-1, 1), ((1, 2, 4),): (-1, 1),
        ((1, 4, 2),): (-1, 1), ((1, 3, 4),): (-1, 1), ((1, 4, 3),): (-1, 1),
        ((2, 3, 4),): (-1, 1), ((2, 4, 3),): (-1, 1),
        ((1, 2), (3, 4)): (0, 0), ((1, 3), (2, 4)): (-2, 2), ((1, 4), (2, 3)): (0, 0),
        ((1, 2, 3, 4),): (0,), ((1, 2, 4, 3),): (0,), ((1, 3, 2, 4),): (0,),
        ((1, 3, 4, 2),): (0,), ((1, 4, 2, 3),): (0,), ((1, 4, 3, 2),): (0,),
    }
    ok = True
    for cycles, powers in expected_r.items():
        rv = haar.compute_R(spec, symgroup.Permutation.from_cycles(4, *cycles))
        ok &= (rv.dA_power, rv.dB_power) == powers
    for cycles, multiples in expected_q.items():
        qv = haar.compute_Q(spec, symgroup.Permutation.from_cycles(4, *cycles))
        ok &= qv.iota_multiples == multiples
    yield "table2 all 48 entries", ok, "exact" if ok else "MISMATCH"


def _selfcheck_identities(full):
    rng = np.random.default_rng(0)
    avg1 = haar.haar_average_moment(1, 2, 3)
    dev = 0.0
    for _ in range(20):
        energies, t = rng.normal(size=6), rng.uniform(0, 5)
        got = avg1.rho_coefficients(energies, t)
        want = haar.rho_coefficients_closed_form(2, 3, energies, t)
        dev = max(
            dev,
            *(abs(g - w) / max(1, abs(w)) for g, w in zip(got, want)),
        )
    yield "density-matrix average identity (n=1)", dev <= 1e-12, f"max rel dev {dev:.2e}"

    avg2 = haar.haar_average_moment(2, 2, 2)
    dev = 0.0
    for _ in range(20):
        energies, t = rng.normal(size=4), rng.uniform(0, 5)
        want = haar.purity_closed_form(2, 2, energies, t)
        dev = max(dev, abs(avg2.evaluate(energies, t) - want) / max(1, abs(want)))
    yield "purity average identity (n=2)", dev <= 1e-12, f"max rel dev {dev:.2e}"

    if full:
        avg3 = haar.haar_average_moment(3, 2, 2)
        dev = 0.0
        for _ in range(20):
            energies, t = rng.normal(size=4), rng.uniform(0, 5)
            want = haar.third_moment_closed_form(2, 2, energies, t)
            dev = max(dev, abs(avg3.evaluate(energies, t) - want))
        yield "third-moment average identity (n=3)", dev <= 1e-9, f"max dev {dev:.2e}"


def _selfcheck_curves():
    ts = np.arange(0.0, 6.0001, 0.01)

    def chi4(t):
        x = t * t
        poly = 12 - 48 * x + 46 * x**2 - 64 / 3 * x**3 + 25 / 6 * x**4 - x**5 / 3
        return poly * np.exp(-x) + 4

    dev = max(abs(spectral.chi_mean(4, t) - chi4(t)) for t in ts)
    yield "d=4 <chi> closed form", dev <= 1e-9, f"max dev {dev:.2e} over t in [0,6]"

    def xi4(t):
        x = t * t
        return (
            24
            + (144 - 576 * x + 552 * x**2 - 256 * x**3 + 50 * x**4 - 4 * x**5)
            * np.exp(-x)
            + (24 - 192 * x + 448 * x**2 - 1024 / 3 * x**3 + 256 / 3 * x**4)
            * np.exp(-2 * x)
            + (96 - 1152 * x + 3312 * x**2 - 3328 * x**3 + 1548 * x**4 - 216 * x**5)
            * np.exp(-3 * x)
            + (48 - 768 * x + 2944 * x**2 - 16384 / 3 * x**3 + 12800 / 3 * x**4
               - 4096 / 3 * x**5)
            * np.exp(-4 * x)
        )

    dev = max(abs(spectral.xi_mean(4, t) - xi4(t)) for t in ts)
    yield "d=4 <xi> closed form", dev <= 1e-9, f"max dev {dev:.2e} over t in [0,6]"

    dev = 0.0
    for d in range(4, 13):
        dev = max(
            dev,
            abs(spectral.chi_mean(d, 0.0) - d * d),
            abs(spectral.xi_mean(d, 0.0) - d * d * (d - 1) * (d + 3))
            / (d * d * (d - 1) * (d + 3)),
            abs(spectral.chi_mean(d, 10.0) - d),
            abs(spectral.xi_mean(d, 10.0) - 2 * d * (d - 1)),
        )
    yield "boundary values d=4..12", dev <= 1e-8, f"max dev {dev:.2e}"

    lim = spectral.purity_limit(2, 2)
    ok = abs(lim - 57 / 70) < 1e-14 and spectral.purity_mean(1, 5, 2.0) == 1.0
    yield "purity limits", ok, f"limit(2,2) = {lim!r}"

    ok = spectral.bessel_limit(0.0, 2) == 1.0 and spectral.bessel_limit(0.0, 4) == 1.0
    yield "scaling limit at tau=0", ok, "exact 1" if ok else "MISMATCH"


def run_selfcheck(args, config):
    checks = []
    checks.extend(_selfcheck_table1())
    checks.extend(_selfcheck_table2())
    checks.extend(_selfcheck_identities(args.full))
    checks.extend(_selfcheck_curves())
    n_fail = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{name}: {detail} [{status}]")
        n_fail += 0 if ok else 1
    print(f"selfcheck: {len(checks) - n_fail}/{len(checks)} passed")
    return 0 if n_fail == 0 else 4


# ---------------------------------------------------------------------------
# Argument plumbing.
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "t-max": 6.0,
    "dt": 0.01,
    "samples": 1000,
    "seed": 0,
    "threads": 1,
    "bins": 50,
    "format": "csv",
    "power": 2,
}

_COUPLING_FLAGS = ("J", "B", "J1", "J2", "J3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guedyn",
        description="Ensemble-averaged entanglement dynamics of random Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, monte=False):
        p.add_argument("--config", help="JSON file of long-flag defaults")
        p.add_argument("--t-max", type=float, dest="t_max")
        p.add_argument("--dt", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        if monte:
            p.add_argument("--samples", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--threads", type=int)
            for flag in _COUPLING_FLAGS:
                p.add_argument(f"--{flag}", type=float)

    p = sub.add_parser("analytic", help="closed-form curves")
    p.add_argument("kind", choices=ANALYTIC_KINDS)
    p.add_argument("--d", type=int, action="append")
    p.add_argument("--dA", type=int, action="append")
    p.add_argument("--dB", type=int, action="append")
    p.add_argument("--power", type=int, choices=(2, 4))
    common(p)
    p.set_defaults(func=run_analytic)

    p = sub.add_parser("montecarlo", help="sampled ensemble dynamics")
    p.add_argument("--model", choices=models.FAMILIES, default="GUE")
    p.add_argument("--dA", type=int, dest="dA_single", default=2)
    p.add_argument("--dB", type=int, dest="dB_single", default=2)
    p.add_argument("--scramble", action="store_true",
                   help="conjugate each sample by a Haar unitary")
    common(p, monte=True)
    p.set_defaults(func=run_montecarlo)

    p = sub.add_parser("gaps", help="level-spacing statistics")
    p.add_argument("--model", choices=models.FAMILIES, default="GUE")
    p.add_argument("--dA", type=int, dest="dA_single", default=8)
    p.add_argument("--dB", type=int, dest="dB_single", default=8)
    p.add_argument("--bins", type=int)
    common(p, monte=True)
    p.set_defaults(func=run_gaps)

    p = sub.add_parser("distance", help="dynamics distance to the baselines")
    p.add_argument("--models", nargs="+", default=list(models.SPIN_FAMILIES))
    p.add_argument("--dA", type=int, dest="dA_single", default=8)
    p.add_argument("--dB", type=int, dest="dB_single", default=32)
    common(p, monte=True)
    p.set_defaults(func=run_distance)

    p = sub.add_parser("selfcheck", help="run the exact identity suite")
    p.add_argument("--full", action="store_true",
                   help="include the (2n)! = 720 double-enumeration identity")
    p.set_defaults(func=run_selfcheck)
    return parser


def _resolve_config(args) -> dict:
    """Merge CLI args (highest), config file, and defaults; echo the result."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        file_cfg = loaded.get("config", loaded)  # accept a manifest directly
    echo = {}
    for key, value in vars(args).items():
        if key in ("func", "command", "config"):
            continue
        flag = {"t_max": "t-max", "dA_single": "dA", "dB_single": "dB"}.get(key, key)
        if value is None:
            if flag in file_cfg:
                value = file_cfg[flag]
            elif flag in _DEFAULTS:
                value = _DEFAULTS[flag]
        setattr(args, key, value)
        echo[flag] = value
    if getattr(args, "out", None) is None:
        kind = getattr(args, "kind", None) or getattr(args, "model", None)
        suffix = f"_{kind.lower()}" if kind else ""
        args.out = f"guedyn_{args.command}{suffix}.{args.format}"
        echo["out"] = args.out
    return echo


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "selfcheck":
            config = _resolve_config(args)
        else:
            config = {}
        return args.func(args, config)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
