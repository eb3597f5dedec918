"""Command line interface.

Exit codes: 0 success, 1 a checked invariant failed, 2 bad input,
3 oracle mismatch, 4 solver did not converge.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, oracle
from .errors import ConvergenceError, InfeasibleError
from .geometry import (random_unimodal, slicing_check, statistical_dimension_mc,
                       width_curve)
from .isotonic import Direction, pava
from .risklab import (Constant, Custom, ExperimentConfig, Indicator, MonotoneStaircase,
                      NoiseSpec, PiecewiseConstantUnimodal, SmoothBump, run_experiment,
                      scaling_slope)
from .rng import stream
from .unimodal import unimodal_lse

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_ORACLE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

SIMULATE_COLUMNS = ["n", "mse_mean", "mse_stderr", "thm1_ratio", "thm2_rhs",
                    "coverage_thm2", "oracle_rhs"]


class InputError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: object
    version: str
    duration_s: float


def fmt(x):
    """Shortest decimal that parses back to the same double."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# -- input parsing -----------------------------------------------------------

def parse_values(text):
    """Numbers from one CSV column (header optional) or whitespace-separated text."""
    values = []
    lines = text.splitlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = [t.strip() for t in line.split(",")] if "," in line else line.split()
        if "," in line and len(tokens) != 1:
            raise InputError(f"line {lineno}: expected one column, found {len(tokens)}")
        for tok in tokens:
            try:
                v = float(tok)
            except ValueError:
                if lineno == 1 and not values and len(tokens) == 1 and len(lines) > 1:
                    break  # header
                raise InputError(f"line {lineno}: cannot parse {tok!r} as a number") from None
            if not math.isfinite(v):
                raise InputError(f"line {lineno}: non-finite value {tok!r}")
            values.append(v)
    if not values:
        raise InputError("line 1: no numeric values found")
    return np.array(values)


SIGNAL_KEYS = {
    "smooth_bump": {"V"},
    "piecewise_constant_unimodal": {"breakpoints", "levels"},
    "indicator": {"lo", "hi"},
    "monotone_staircase": {"s", "V"},
    "constant": {"level"},
    "custom": {"values"},
}
TOP_KEYS = {"n_grid", "reps", "seed", "alpha", "estimator", "oracle"}


def _numbers(text, cast=float):
    return [cast(t) for t in text.replace(",", " ").split()]


def _breakpoint(tok):
    return float(tok) if any(c in tok for c in ".eE") else int(tok)


def parse_config(text):
    """Parse the flat ``key = value`` experiment file into an ExperimentConfig.

    Keys: ``n_grid`` (list), ``reps``, ``seed``, ``alpha``, ``estimator``
    (``unimodal``/``isotonic``), ``oracle`` (true/false), ``noise.kind``,
    ``noise.sigma``, ``signal.kind`` plus the parameters of that kind.
    Lists are comma or space separated; ``#`` starts a comment.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value

    kind = raw.get("signal.kind", "smooth_bump")
    if kind not in SIGNAL_KEYS:
        raise InputError(f"unknown signal kind {kind!r}")
    allowed = (TOP_KEYS | {"signal.kind", "noise.kind", "noise.sigma"}
               | {f"signal.{k}" for k in SIGNAL_KEYS[kind]})
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise InputError(f"unknown config key(s): {', '.join(unknown)}")
    missing = [k for k in ("n_grid", "reps", "seed") if k not in raw]
    if missing:
        raise InputError(f"missing config key(s): {', '.join(missing)}")

    p = {k.split(".", 1)[1]: v for k, v in raw.items() if k.startswith("signal.")}
    try:
        if kind == "smooth_bump":
            signal = SmoothBump(float(p.get("V", 1.0)))
        elif kind == "piecewise_constant_unimodal":
            signal = PiecewiseConstantUnimodal(
                tuple(_breakpoint(t) for t in p["breakpoints"].replace(",", " ").split()),
                tuple(_numbers(p["levels"])))
        elif kind == "indicator":
            signal = Indicator(float(p.get("lo", 1 / 3)), float(p.get("hi", 2 / 3)))
        elif kind == "monotone_staircase":
            signal = MonotoneStaircase(int(p["s"]), float(p.get("V", 1.0)))
        elif kind == "constant":
            signal = Constant(float(p.get("level", 0.0)))
        else:
            signal = Custom(tuple(_numbers(p["values"])))
        noise = NoiseSpec(raw.get("noise.kind", "gaussian"), float(raw.get("noise.sigma", 1.0)))
        return ExperimentConfig(
            n_grid=_numbers(raw["n_grid"], int), replications=int(raw["reps"]),
            seed=int(raw["seed"]), signal=signal, noise=noise,
            alpha=float(raw.get("alpha", 1.0)), estimator=raw.get("estimator", "unimodal"),
            oracle=raw.get("oracle", "true").lower() in ("1", "true", "yes"))
    except KeyError as exc:
        raise InputError(f"missing config key: signal.{exc.args[0]}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def config_to_dict(cfg):
    out = asdict(cfg)
    out["signal"] = {"kind": type(cfg.signal).__name__, **asdict(cfg.signal)}
    return out


# -- commands ----------------------------------------------------------------

def cmd_fit(args):
    start = time.perf_counter()
    text = sys.stdin.read() if args.input in (None, "-") else open(args.input).read()
    y = parse_values(text)
    n = y.size
    summary = {"n": n}
    per_mode = None
    if args.direction:
        direction = Direction.parse(args.direction)
        fit = pava(y, direction)
        fitted = fit.fitted
        summary.update(direction=direction.value, mode=None, sse=fit.sse)
    else:
        fit = unimodal_lse(y, per_mode=True)
        fitted = fit.fitted
        per_mode = fit.per_mode_sse
        summary.update(mode=fit.mode, sse=fit.sse, split=fit.split)

    if args.oracle:
        limit = oracle.MAX_MONOTONE_N if args.direction else oracle.MAX_UNIMODAL_N
        if n > limit:
            raise InputError(f"--oracle supports n <= {limit}, got n={n}")
        if args.direction:
            expected = oracle.brute_monotone_projection(y, Direction.parse(args.direction))
        else:
            expected = oracle.brute_unimodal_projection(y)[0]
        err = float(np.max(np.abs(expected - fitted)))
        summary["oracle_max_abs_diff"] = err
        if err > 1e-9:
            print(f"oracle mismatch: max |diff| = {err:.3g}", file=sys.stderr)
            return EXIT_ORACLE

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["index", "y", "fitted"]
    if args.per_mode_sse and per_mode is not None:
        header.append("per_mode_sse")
    w.writerow(header)
    for i in range(n):
        row = [i + 1, fmt(y[i]), fmt(fitted[i])]
        if len(header) == 4:
            row.append(fmt(per_mode[i]))
        w.writerow(row)
    _write(args.out, buf.getvalue())

    summary["manifest"] = asdict(RunManifest(
        "fit", {"direction": args.direction, "oracle": args.oracle}, None, __version__,
        time.perf_counter() - start))
    text = _json(summary)
    if args.summary:
        _write(args.summary, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def report_to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIMULATE_COLUMNS)
    for r in report.rows:
        w.writerow([fmt(r.n), fmt(r.mse_mean), fmt(r.mse_std_err), fmt(r.thm1_ratio),
                    fmt(r.thm2_rhs), fmt(r.coverage_thm2), fmt(r.oracle_rhs)])
    return buf.getvalue()


def cmd_simulate(args):
    start = time.perf_counter()
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_experiment(cfg, workers=args.threads)
    _write(args.out, report_to_csv(report))
    manifest = RunManifest("simulate", config_to_dict(cfg), cfg.seed, __version__,
                           time.perf_counter() - start)
    path = args.manifest or (args.out + ".manifest.json" if args.out not in (None, "-") else None)
    if path:
        _write(path, _json(asdict(manifest)))
    return EXIT_OK


def cmd_scaling(args):
    try:
        with open(args.report, newline="") as fh:
            rows = list(csv.DictReader(fh))
        n = [float(r["n"]) for r in rows]
        mse = [float(r["mse_mean"]) for r in rows]
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed report {args.report}: {exc}") from None
    if len(n) < 3:
        raise InputError("report needs at least three n values")
    try:
        slope, err = scaling_slope(n, mse)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(args.out, _json({"slope": slope, "stderr": err, "n_points": len(n)}))
    return EXIT_OK


def cmd_slicing(args):
    start = time.perf_counter()
    if not 1 <= args.n <= 8:
        raise InputError("slicing checks support 1 <= n <= 8")
    results, ok = [], True
    for i in range(args.instances):
        rng = stream(args.seed, args.n, i)
        theta = random_unimodal(args.n, rng)
        z = args.sigma * rng.standard_normal(args.n)
        rep = slicing_check(theta + z, theta, grid_points=args.grid_points)
        tol = 1e-3 * (1.0 + float(z @ z))
        passed = rep.identity_gap <= tol and rep.termination_holds
        ok &= passed
        results.append({
            "instance": i, "identity_gap": rep.identity_gap, "signed_gap": rep.signed_gap,
            "tolerance": tol, "achieved_radius": rep.achieved_radius,
            "f_at_achieved": rep.f_at_achieved, "max_f_on_grid": rep.max_f_on_grid,
            "termination_radius": rep.termination_radius,
            "termination_holds": rep.termination_holds, "passed": passed})
    out = {"n": args.n, "seed": args.seed, "sigma": args.sigma,
           "grid_points": args.grid_points, "instances": results, "passed": ok,
           "manifest": asdict(RunManifest("slicing", vars_clean(args), args.seed,
                                          __version__, time.perf_counter() - start))}
    _write(args.out, _json(out))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_width(args):
    start = time.perf_counter()
    theta = MonotoneStaircase(args.pieces, args.V).values(args.n)
    t_grid = np.linspace(0.0, args.t_max, args.t_points)
    est = width_curve(theta, t_grid, replications=args.reps, seed=args.seed,
                      bound=args.bound, alpha=args.alpha)
    monotone = bool(np.all(np.diff(est.mean_sup) >= -1e-9))
    out = {"n": args.n, "pieces": args.pieces, "V": args.V, "bound_kind": est.bound_kind,
           "t_grid": est.t_grid.tolist(), "mean_sup": est.mean_sup.tolist(),
           "std_err": est.std_err.tolist(), "bound_curve": est.bound_curve.tolist(),
           "ratio": [None if not math.isfinite(r) else r for r in est.ratio.tolist()],
           "replications": est.replications, "seed": est.seed,
           "monotone_in_t": monotone,
           "manifest": asdict(RunManifest("width", vars_clean(args), args.seed,
                                          __version__, time.perf_counter() - start))}
    _write(args.out, _json(out))
    return EXIT_OK if monotone else EXIT_CHECK


def cmd_statdim(args):
    start = time.perf_counter()
    est = statistical_dimension_mc(args.n, args.reps, args.seed, pointwise=args.pointwise)
    within = est.estimate <= est.bound + 3 * est.std_err
    pointwise_ok = not args.pointwise or est.pointwise_max_error <= 1e-6
    out = {"n": est.n, "estimate": est.estimate, "stderr": est.std_err,
           "log_en_bound": est.bound, "within_bound": within,
           "pointwise_max_error": est.pointwise_max_error if args.pointwise else None,
           "replications": est.replications,
           "manifest": asdict(RunManifest("statdim", vars_clean(args), args.seed,
                                          __version__, time.perf_counter() - start))}
    _write(args.out, _json(out))
    return EXIT_OK if within and pointwise_ok else EXIT_CHECK


def vars_clean(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser():
    p = argparse.ArgumentParser(prog="unireg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a unimodal (or monotone) sequence")
    f.add_argument("input", nargs="?", help="input file (default: stdin)")
    f.add_argument("--out", help="CSV destination (default: stdout)")
    f.add_argument("--summary", help="JSON summary destination (default: stderr)")
    f.add_argument("--direction", choices=["up", "down"], help="plain isotonic fit")
    f.add_argument("--per-mode-sse", action="store_true",
                   help="add the per-mode split error as a fourth column")
    f.add_argument("--oracle", action="store_true", help="cross-check by brute force")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="run a Monte Carlo risk experiment")
    s.add_argument("config")
    s.add_argument("--out", help="CSV destination (default: stdout)")
    s.add_argument("--manifest", help="manifest destination (default: OUT.manifest.json)")
    s.add_argument("--seed", type=int, help="override the config seed")
    s.add_argument("--threads", type=int, default=1,
                   help="worker processes; never changes the numbers")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("scaling", help="log-log slope of a simulate report")
    c.add_argument("report")
    c.add_argument("--out")
    c.set_defaults(func=cmd_scaling)

    sl = sub.add_parser("slicing", help="check the slicing identity on random instances")
    sl.add_argument("--n", type=int, default=6)
    sl.add_argument("--seed", type=int, default=0)
    sl.add_argument("--grid-points", type=int, default=200)
    sl.add_argument("--instances", type=int, default=1)
    sl.add_argument("--sigma", type=float, default=1.0)
    sl.add_argument("--out")
    sl.set_defaults(func=cmd_slicing)

    w = sub.add_parser("width", help="Monte Carlo localized width curve")
    w.add_argument("--n", type=int, default=32)
    w.add_argument("--pieces", type=int, default=2, help="pieces of the monotone center")
    w.add_argument("--V", type=float, default=1.0)
    w.add_argument("--reps", type=int, default=50)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--t-max", type=float, default=4.0)
    w.add_argument("--t-points", type=int, default=9)
    w.add_argument("--bound", choices=["worst", "adaptive"], default="worst")
    w.add_argument("--alpha", type=float, default=1.0)
    w.add_argument("--out")
    w.set_defaults(func=cmd_width)

    d = sub.add_parser("statdim", help="statistical dimension of the monotone cone")
    d.add_argument("--n", type=int, default=8)
    d.add_argument("--reps", type=int, default=10_000)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--pointwise", type=int, default=0,
                   help="draws on which to check the norm/supremum identity")
    d.add_argument("--out")
    d.set_defaults(func=cmd_statdim)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, InfeasibleError) as exc:
        gap = getattr(exc, "gap", float("nan"))
        print(f"convergence failure: {exc} (gap {gap:.3g})", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
