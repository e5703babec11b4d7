"""Command-line harness.

Subcommands::

    simulate           one moment estimate for a catalog model
    table1             exact vs Euler second moments of the Stratonovich GL equation
    figure1            E|Y_N| of the power-drift model for N = 1..N_max
    bounds             log2 divergence lower bounds for N = 1..N_max
    check-certificate  sample the growth condition of a catalog model

Exit codes: 0 success, 1 usage, 2 certificate violation, 3 I/O failure.
Non-finite numbers are written as ``NaN``, ``Inf`` and ``-Inf``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

from . import bounds, models
from .brownian import derive_seed
from .exact import QuadratureConfig
from .montecarlo import EulerSampler, ExactSampler, estimate_moment

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_IO = 0, 1, 2, 3

SIMULATE_COLUMNS = [
    "model", "N", "runs", "p", "ieee_mean", "finite_mean", "finite_stderr",
    "count_finite", "count_pos_inf", "count_neg_inf", "count_nan",
]
TABLE1_COLUMNS = [
    "sigma", "exact_E_X3_sq", "euler_ieee_mean", "euler_finite_mean",
    "count_nan", "count_inf", "stderr", "exact_stderr",
]
FIGURE1_COLUMNS = ["N", "E_abs_ieee", "E_abs_finite", "count_inf", "count_nan"]
BOUNDS_COLUMNS = ["N", "r_N", "log2_prob_lower", "log2_expectation_lower", "certified"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Inf" if v > 0 else "-Inf"
        return repr(v)
    return v


def json_value(v):
    """Native JSON value; only non-finite floats become strings."""
    if isinstance(v, float) and not math.isfinite(v):
        return format_value(v)
    return v


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: json_value(r[c]) for c in columns} for r in rows], indent=2) + "\n"
    rows = [{c: format_value(r[c]) for c in columns} for r in rows]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _params(pairs) -> dict[str, float]:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    return out


def _positive(name, value):
    if value < 1:
        raise UsageError(f"{name} must be >= 1, got {value}")


# -- subcommands -----------------------------------------------------------

def cmd_simulate(args) -> int:
    spec, _ = models.catalog(args.model, _params(args.param))
    _positive("--steps", args.steps)
    _positive("--runs", args.runs)
    est = estimate_moment(EulerSampler(spec, args.steps), args.moment_p, args.runs, args.seed, args.workers)
    row = {"model": args.model, "N": args.steps, **{c: getattr(est, c) for c in SIMULATE_COLUMNS[2:]}}
    _write(render([row], SIMULATE_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    for name in ("--steps", "--exact-steps", "--runs", "--runs-exact", "--substeps"):
        _positive(name, getattr(args, name.lstrip("-").replace("-", "_")))
    try:
        sigmas = [float(s) for s in args.sigmas.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sigmas must be a comma-separated list of numbers, got {args.sigmas!r}") from None
    cfg = QuadratureConfig(args.substeps)
    rows = []
    for i, sigma in enumerate(sigmas):
        spec, _ = models.catalog("stratonovich_gl", {"sigma": sigma})
        # independent streams per sigma cell, separate for exact and Euler
        exact = estimate_moment(ExactSampler(spec, args.exact_steps, cfg), 2.0, args.runs_exact,
                                derive_seed(args.seed, i, 1), args.workers)
        euler = estimate_moment(EulerSampler(spec, args.steps), 2.0, args.runs,
                                derive_seed(args.seed, i, 0), args.workers)
        rows.append({
            "sigma": sigma,
            "exact_E_X3_sq": exact.ieee_mean,
            "euler_ieee_mean": euler.ieee_mean,
            "euler_finite_mean": euler.finite_mean,
            "count_nan": euler.count_nan,
            "count_inf": euler.count_pos_inf + euler.count_neg_inf,
            "stderr": euler.finite_stderr,
            "exact_stderr": exact.finite_stderr,
        })
    _write(render(rows, TABLE1_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_figure1(args) -> int:
    _positive("--steps-max", args.steps_max)
    _positive("--runs", args.runs)
    spec, _ = models.catalog("power_drift")
    rows = []
    for N in range(1, args.steps_max + 1):
        est = estimate_moment(EulerSampler(spec, N), 1.0, args.runs, derive_seed(args.seed, N), args.workers)
        rows.append({
            "N": N,
            "E_abs_ieee": est.ieee_mean,
            "E_abs_finite": est.finite_mean,
            "count_inf": est.count_pos_inf + est.count_neg_inf,
            "count_nan": est.count_nan,
        })
    _write(render(rows, FIGURE1_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    _positive("--steps-max", args.steps_max)
    if args.mode == "simple" and args.steps_max > 1024:
        raise UsageError("--steps-max must be <= 1024 in simple mode")
    kwargs = {}
    if args.mode == "general":
        if not args.model:
            raise UsageError("--mode general needs --model")
        params = {"T": args.horizon, **_params(args.param)}
        spec, cert = models.catalog(args.model, params)
        if cert is None:
            raise UsageError(f"model {args.model} has no growth certificate")
        K, mu = bounds.k_and_mu(spec)
        kwargs = {"cert": bounds.induction_certificate(cert), "K": K, "mu": mu}
    rows = []
    for N in range(1, args.steps_max + 1):
        rep = bounds.divergence_lower_bound(N, args.horizon, args.mode, **kwargs)
        rows.append({
            "N": N,
            "r_N": rep.r_N,
            "log2_prob_lower": rep.log2_prob_lower,
            "log2_expectation_lower": rep.log2_expectation_lower,
            "certified": rep.certified,
        })
    _write(render(rows, BOUNDS_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_check_certificate(args) -> int:
    spec, cert = models.catalog(args.model, _params(args.param))
    if cert is None:
        raise UsageError(f"model {args.model} has no growth certificate")
    overrides = {k: v for k, v in (("C", args.C), ("alpha", args.alpha), ("beta", args.beta)) if v is not None}
    if overrides:
        cert = replace(cert, **overrides)
    if args.points < 2:
        raise UsageError(f"--points must be >= 2, got {args.points}")
    if not args.x_max > cert.C:
        raise UsageError(f"--x-max {args.x_max} must exceed C={cert.C}")
    report = models.check_growth_certificate(spec, cert, args.points, args.x_max)
    record = {
        "model": args.model,
        "C": cert.C,
        "alpha": cert.alpha,
        "beta": cert.beta,
        "dominating": cert.dominating,
        "holds": report.holds,
        "first_violation": report.first_violation,
    }
    if args.format == "json":
        text = json.dumps({k: json_value(v) for k, v in record.items()}, indent=2) + "\n"
    else:
        status = "holds" if report.holds else f"violated at x = {report.first_violation!r}"
        text = (f"{args.model}: C={cert.C!r} alpha={cert.alpha!r} beta={cert.beta!r} "
                f"dominating={cert.dominating}: {status}\n")
    _write(text, args.out)
    return EXIT_OK if report.holds else EXIT_CERT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eulerdiv", description="Euler-Maruyama divergence experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=True, workers=True):
        if seed:
            p.add_argument("--seed", type=int, required=True)
        if workers:
            p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="moment estimate for one catalog model")
    p.add_argument("--model", required=True, choices=models.MODEL_NAMES)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--moment-p", type=float, default=2.0)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table1", help="exact vs Euler second moments of the Stratonovich GL equation")
    p.add_argument("--sigmas", default="2,4,5,6,7")
    p.add_argument("--steps", type=int, default=1000, help="Euler steps")
    p.add_argument("--exact-steps", type=int, default=300, help="coarse steps of the exact-solution grid")
    p.add_argument("--substeps", type=int, default=32, help="quadrature refinement per coarse step")
    p.add_argument("--runs", type=int, default=100_000, help="Euler runs per sigma")
    p.add_argument("--runs-exact", type=int, default=1_000_000, help="exact-solution runs per sigma")
    common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("figure1", help="E|Y_N| of the power-drift model")
    p.add_argument("--steps-max", type=int, default=53)
    p.add_argument("--runs", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("bounds", help="log2 divergence lower bounds")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--steps-max", type=int, default=64)
    p.add_argument("--mode", choices=("simple", "general"), default="simple")
    p.add_argument("--model", choices=models.CERTIFIED_MODELS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check-certificate", help="sample the growth condition of a catalog model")
    p.add_argument("--model", required=True, choices=models.MODEL_NAMES)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--x-max", type=float, default=1e6)
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--C", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_check_certificate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", 1) < 1:
            raise UsageError(f"--workers must be >= 1, got {args.workers}")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
