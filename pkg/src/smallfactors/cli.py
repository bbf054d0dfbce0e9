"""Command-line interface.

Exit codes: 0 success, 2 usage, 3 resource limit, 4 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import contour, harness, predictors, sieve, special
from .primes import DomainError, ResourceError, build_prime_table

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_DOMAIN = 0, 2, 3, 4

log = logging.getLogger("smallfactors")


class UsageError(Exception):
    pass


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _integer(text: str) -> int:
    v = _number(text)
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([harness.fmt(v) for v in r])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        harness.write_text(args.out, text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def _z(args) -> complex:
    return complex(args.z_re if args.z_re is not None else 1.0, args.z_im or 0.0)


def _y_for(args, x: float) -> float:
    if args.y is not None:
        return args.y
    if args.alpha is not None:
        return x ** (1 / args.alpha)
    if args.beta is not None:
        return x / args.beta
    return x


# --- subcommands -------------------------------------------------------------


def cmd_count(args) -> None:
    _need(args, "x")
    x = args.x
    y = _y_for(args, x)
    if x < 1:
        counts = (0,)
    else:
        counts = sieve.count_nk(x, y).counts
    if args.k_max is not None:
        counts = tuple(counts[: args.k_max + 1]) + (0,) * max(0, args.k_max + 1 - len(counts))
    _emit(args, _csv(["k", "N_k"], enumerate(counts)))


def cmd_phi(args) -> None:
    _need(args, "x")
    x = args.x
    y = _y_for(args, x)
    table = build_prime_table(max(2, math.floor(x)), cache=args.cache_dir or True)
    _emit(args, _csv(["x", "y", "phi"], [(x, float(y), sieve.phi(x, y, table))]))


def cmd_sum(args) -> None:
    _need(args, "x")
    x = args.x
    y = _y_for(args, x)
    z = _z(args)
    s = complex(sieve.sum_sz(x, y, z))
    _emit(args, _csv(["x", "y", "z_re", "z_im", "re", "im"], [(x, float(y), z.real, z.imag, s.real, s.imag)]))


def _grid(start: float, end: float, points: int | None, step: float) -> np.ndarray:
    if end <= start:
        raise DomainError("grid end must exceed its start")
    if points is not None:
        if points < 2:
            raise UsageError("--points must be >= 2")
        return np.linspace(start, end, points)
    n = int(round((end - start) / step))
    return start + step * np.arange(n + 1)


def cmd_special(args) -> None:
    model = args.model or "w"
    step = 2.0**-6
    end = args.alpha
    if model == "w":
        a = _grid(args.start if args.start is not None else 1.0, end or 10.0, args.points, step)
        vals = special.buchstab_w(a).astype(complex)
        label = "alpha"
    elif model == "rho":
        r = args.r if args.r is not None else 1.0
        a = _grid(args.start if args.start is not None else step, end or 10.0, args.points, step)
        vals = special.rho_r(a, r).astype(complex)
        label = "u"
    elif model == "m":
        z = complex(args.r, 0.0) if args.r is not None and args.z_re is None else _z(args)
        if z.real <= 0:
            raise DomainError("m_z needs Re z > 0")
        a = _grid(args.start if args.start is not None else 1.0, end or 10.0, args.points, step)
        vals = np.asarray(special.m_z(a, z), dtype=complex)
        label = "alpha"
    elif model == "ell":
        a = _grid(args.start if args.start is not None else 0.0, end or 3.0, args.points, step)
        im = args.z_im or 0.0
        vals = np.array([special.ell(complex(v, im)) for v in a])
        label = "z"
    else:
        raise UsageError(f"special --model must be one of w, rho, m, ell (got {model!r})")
    _emit(args, _csv([label, "re", "im"], ((float(t), v.real, v.imag) for t, v in zip(a, vals))))
    if args.svg:
        names = {"w": "w(alpha)", "rho": "rho_r(u)", "m": "Re m_z(alpha)", "ell": "Re l(z)"}
        harness.write_text(args.svg, harness.svg_plot(
            {names[model]: (a.tolist(), vals.real.tolist())}, xlabel=label, ylabel=names[model]))


def cmd_predict(args) -> None:
    _need(args, "model", "x")
    x = args.x
    y = _y_for(args, x)
    pid = predictors.PredictorId(args.model)
    if pid in predictors.SUM_PREDICTORS:
        p = predictors.SUM_PREDICTORS[pid](x, y, _z(args))
    else:
        if args.k is None:
            raise UsageError(f"predictor {pid.value} needs --k")
        p = predictors.COUNT_PREDICTORS[pid](x, y, args.k)
    v = complex(p.value)
    header = ["predictor", "x", "y", "k", "alpha", "r", "beta", "re", "im", "valid", "reason"]
    row = [p.predictor.value, float(p.x), float(p.y) if p.y is not None else "",
           "" if p.k is None else p.k, "" if p.alpha is None else float(p.alpha),
           "" if p.r is None else float(p.r), "" if p.beta is None else float(p.beta),
           v.real, v.imag, p.valid, p.reason]
    _emit(args, _csv(header, [row]))


def _compare_config(args) -> harness.ExperimentConfig:
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    changes = {}
    if args.x_list is not None:
        changes["x_list"] = tuple(int(float(t)) for t in args.x_list.split(","))
    if args.y is not None:
        changes["y_rule"] = harness.YRule("fixed", args.y)
    elif args.alpha is not None:
        changes["y_rule"] = harness.YRule("power", args.alpha)
    elif args.beta is not None:
        changes["y_rule"] = harness.YRule("ratio", args.beta)
    elif args.c is not None:
        changes["y_rule"] = harness.YRule("exp_rule", args.c)
    if args.k is not None:
        changes["k_range"] = (args.k,)
    elif args.k_max is not None:
        changes["k_range"] = tuple(range(args.k_max + 1))
    if args.model is not None:
        changes["predictors"] = harness.parse_predictors(args.model)
    for key in ("out", "svg", "cache_dir"):
        if getattr(args, key):
            changes[key] = getattr(args, key)
    return replace(cfg, **changes)


def cmd_compare(args) -> None:
    cfg = _compare_config(args)
    if cfg.cache_dir:
        os.environ["SPF_CACHE_DIR"] = cfg.cache_dir
    report = harness.compare(cfg)
    text = report.to_csv()
    if cfg.out:
        harness.write_text(cfg.out, text)
    else:
        sys.stdout.write(text)
    if cfg.svg:
        series = {}
        for pid in cfg.predictors:
            for k in cfg.k_range:
                pts = report.series(pid.value, k)
                series[f"{pid.value} k={k}"] = ([p[0] for p in pts], [p[1] for p in pts])
        harness.write_text(cfg.svg, harness.svg_plot(
            series, title=f"y rule {cfg.y_rule}", xlabel="x", ylabel="relative error", logx=True))


def cmd_contour_check(args) -> None:
    _need(args, "x")
    x = args.x
    y = _y_for(args, x)
    m = args.points or 64
    exact = sieve.count_nk(x, y).counts if x >= 1 else (0,)
    k_max = len(exact) - 1
    if m <= k_max:
        raise contour.ContourSpecError(f"points = {m} must exceed the observed k_max = {k_max}")
    rows = []
    if args.r is not None:
        ex = contour.extract(x, y, contour.ContourSpec(args.r, m, k_max))
        cond = ex.conditioning()
        rows = [(k, exact[k], ex.counts[k], args.r, cond[k]) for k in range(k_max + 1)]
    else:
        for k in range(k_max + 1):
            r = contour.radius_policy(k, y)
            ex = contour.extract(x, y, contour.ContourSpec(r, m, k_max))
            rows.append((k, exact[k], ex.counts[k], r, ex.conditioning()[k]))
    dev = max(abs(c - e) for _, e, c, _, _ in rows)
    table = _csv(["k", "exact", "extracted", "abs_deviation", "radius", "conditioning"],
                 [(k, e, float(c), float(abs(c - e)), float(r), float(cd)) for k, e, c, r, cd in rows])
    if args.out:
        harness.write_text(args.out, table)
    sys.stdout.write(f"max_abs_deviation,{harness.fmt(float(dev))}\n")


def cmd_phenomenon(args) -> None:
    _need(args, "x")
    rep = harness.phenomenon(int(args.x), args.c if args.c is not None else 12.0, args.k_max)
    _emit(args, rep.to_csv())
    sys.stderr.write(rep.summary() + "\n")


COMMANDS = {
    "count": cmd_count,
    "phi": cmd_phi,
    "sum": cmd_sum,
    "special": cmd_special,
    "predict": cmd_predict,
    "compare": cmd_compare,
    "contour-check": cmd_contour_check,
    "phenomenon": cmd_phenomenon,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--x", type=_number)
    common.add_argument("--y", type=_number)
    common.add_argument("--alpha", type=_number, help="y = x^(1/alpha); upper grid end for special")
    common.add_argument("--beta", type=_number, help="y = x/beta")
    common.add_argument("--c", type=_number, help="y = exp(log x / (c loglog x))")
    common.add_argument("--k", type=_integer)
    common.add_argument("--k-max", type=_integer)
    common.add_argument("--z-re", type=_number)
    common.add_argument("--z-im", type=_number)
    common.add_argument("--r", type=_number)
    common.add_argument("--start", type=_number, help="grid start for special")
    common.add_argument("--model")
    common.add_argument("--config")
    common.add_argument("--out")
    common.add_argument("--svg")
    common.add_argument("--cache-dir")
    common.add_argument("--points", type=_integer)
    common.add_argument("--x-list", help="comma-separated x values for compare")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="smallfactors", description="Small prime factors: counts and asymptotics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.cache_dir:
        os.environ["SPF_CACHE_DIR"] = args.cache_dir
    if args.command == "compare" and args.x is not None and args.x_list is None:
        args.x_list = str(int(args.x))
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
