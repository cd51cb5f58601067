"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 kernel correctness failure.
Results go to stdout as ``key=value`` lines (or CSV for ``bench`` and
``plot-data``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io as rio
from .bench import BenchPlan, Kernel, KernelCorrectnessError, run_bench
from .core import ArchitectureProfile, Kind, RClass, classify, convert, implies_bl
from .estimators import (Interval, PointWeights, SubintervalWeights, compare, crossover, erm1,
                         erm2, rm1, rm2)
from .expression import ExpressionError, evaluate, parse, render
from .fitting import FitError, MetricKind, TermLibrary, fit_known, fit_unknown
from .units import humanize_bytes, humanize_duration

OUTPUT_DIR_ENV = "RCOMPLEXITY_OUTPUT_DIR"
UNITS = {MetricKind.TIME_SECONDS: "s", MetricKind.PEAK_MEMORY_BYTES: "B"}

class UsageError(ValueError):
    pass


def _emit(text: str, out: str | None, default_name: str) -> Path | None:
    """Write ``text`` to ``out``, else into $RCOMPLEXITY_OUTPUT_DIR, else stdout."""
    target = None
    if out:
        target = Path(out)
    elif os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / default_name
    if target is None:
        sys.stdout.write(text)
        return None
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    print(f"wrote {target}", file=sys.stderr)
    return target


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise UsageError("empty size list")
    return values


def _range(text: str) -> Interval:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise UsageError(f"range must look like a:b, got {text!r}")
    try:
        return Interval(int(lo), int(hi))
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}: {exc}") from None


def _model(expr: str | None, report: str | None, what: str = "model"):
    if (expr is None) == (report is None):
        raise UsageError(f"give exactly one of --{what} or --{what}-report")
    if expr is not None:
        return parse(expr), None
    fit, _ = rio.read_report(Path(report).read_text(), report)
    return fit.model, fit.metric


def _print(**items) -> None:
    for key, value in items.items():
        print(f"{key}={value}")


def _fmt(x: float) -> str:
    return repr(float(x))


# ------------------------------------------------------------------ bench

BENCH_KEYS = {"kernel", "sizes", "reps", "warmups", "block_size", "cutoff", "seed"}


def cmd_bench(args) -> int:
    cfg = {}
    if args.config:
        cfg = rio.parse_config(Path(args.config).read_text(), args.config)
        unknown = set(cfg) - BENCH_KEYS - {"format"}
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")

    def pick(flag, key, conv, default=None):
        if flag is not None:
            return flag
        if key in cfg:
            return conv(cfg[key])
        return default

    kernel = pick(args.kernel, "kernel", str)
    sizes = pick(args.sizes, "sizes", str)
    if kernel is None:
        raise UsageError("--kernel is required")
    if sizes is None:
        raise UsageError("--sizes is required")
    try:
        plan = BenchPlan(
            kernel=Kernel.parse(kernel),
            sizes=_int_list(sizes),
            repetitions=pick(args.reps, "reps", int, 5),
            warmups=pick(args.warmups, "warmups", int, 2),
            block_size=pick(args.block_size, "block_size", int, 64),
            strassen_cutoff=pick(args.cutoff, "cutoff", int, 64),
            seed=pick(args.seed, "seed", int, 0),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    result = run_bench(plan)
    label = args.label or plan.kernel.value
    rows = []
    for r in result.records:
        rows.append(rio.DatasetRow(label, MetricKind.TIME_SECONDS, r.n, r.elapsed,
                                   r.repetitions, r.timestamp))
    for r in result.records:
        rows.append(rio.DatasetRow(label, MetricKind.PEAK_MEMORY_BYTES, r.n,
                                   float(r.peak_alloc_bytes), 1, r.timestamp))
    buf = io.StringIO()
    rio.write_dataset(rows, buf)
    _emit(buf.getvalue(), args.out, f"bench-{plan.kernel.value}.csv")
    for r in result.records:
        print(f"{plan.kernel.value} n={r.n} median={r.elapsed:.6g}s "
              f"peak={humanize_bytes(r.peak_alloc_bytes)}", file=sys.stderr)
    return 0


# -------------------------------------------------------------------- fit

def cmd_fit(args) -> int:
    rows = rio.read_dataset(args.data)
    metric = MetricKind(args.metric)
    arch = ArchitectureProfile(args.hz, args.arch_label or "") if args.hz else None
    data = rio.rows_to_measurements(rows, metric, args.label, arch)
    if len(data) == 0:
        raise UsageError(f"no {metric.value} rows in {args.data}")
    if args.known:
        fit = fit_known(data, parse(args.known), intercept=args.intercept,
                        log_loss=args.log_loss, trim_outliers=args.trim_outliers)
    else:
        library = (rio.read_library(Path(args.library).read_text(), args.library)
                   if args.library else TermLibrary())
        fit = fit_unknown(data, library, log_loss=args.log_loss, n_jobs=args.jobs)
    text = rio.dump_report(fit, data.label)
    if args.out or os.environ.get(OUTPUT_DIR_ENV):
        _emit(text, args.out, f"fit-{data.label or 'data'}.report")
    sys.stdout.write(text)
    return 0


# --------------------------------------------------------------- estimate

def _estimate(model, metric: str, interval: Interval | None, weights_path: str | None):
    weights = None
    if weights_path:
        weights = rio.read_weights(Path(weights_path).read_text(), weights_path)
    if metric in ("rm1", "rm2", "erm1") and interval is None:
        raise UsageError(f"{metric} needs --range")
    if metric == "rm1":
        return rm1(model, interval), None
    if metric == "rm2":
        return rm2(model, interval), None
    if metric == "erm1":
        if not isinstance(weights, PointWeights):
            raise UsageError("erm1 needs a --weights file with mode = points")
        return erm1(model, interval, weights), None
    if metric == "erm2":
        if not isinstance(weights, SubintervalWeights):
            raise UsageError("erm2 needs a --weights file with mode = subintervals")
        if interval is not None and interval != weights.interval:
            raise UsageError(f"--range does not match the knots {weights.knots[0]}:{weights.knots[-1]}")
        return erm2(model, weights), erm2(model, weights, normalized=True)
    raise UsageError(f"unknown metric {metric!r}")


def cmd_estimate(args) -> int:
    model, kind = _model(args.model, args.report)
    interval = _range(args.range) if args.range else None
    est, normalized = _estimate(model, args.metric, interval, args.weights)
    _print(metric=est.metric.value, range=f"{est.interval.n_min}:{est.interval.n_max}",
           model=render(model), value=_fmt(est.value), units=UNITS.get(kind, "model-units"),
           overflow=str(est.overflow).lower())
    if normalized is not None:
        _print(normalized_value=_fmt(normalized.value))
    return 0


def cmd_compare(args) -> int:
    first, k1 = _model(args.first, args.first_report, "first")
    second, k2 = _model(args.second, args.second_report, "second")
    if k1 and k2 and k1 != k2:
        raise UsageError(f"reports measure different metrics ({k1.value} vs {k2.value})")
    interval = _range(args.range) if args.range else None
    t1, _ = _estimate(first, args.metric, interval, args.weights)
    t2, _ = _estimate(second, args.metric, interval, args.weights)
    verdict = compare(t1, t2, args.tolerance)
    _print(metric=t1.metric.value, range=f"{t1.interval.n_min}:{t1.interval.n_max}",
           first_value=_fmt(t1.value), second_value=_fmt(t2.value),
           ratio=_fmt(verdict.ratio), verdict=verdict.outcome.value)
    return 0


def cmd_crossover(args) -> int:
    f, g = parse(args.first), parse(args.second)
    res = crossover(f, g)
    if not res.exists:
        _print(exists="false", reason=res.reason or "no crossover")
        print("no crossover")
        return 0
    fv, gv = evaluate(f, res.n0), evaluate(g, res.n0)
    _print(exists="true", n0=_fmt(res.n0), first_at_n0=_fmt(fv), second_at_n0=_fmt(gv),
           bracket=f"{res.bracket[0]!r}:{res.bracket[1]!r}")
    if args.seconds:
        _print(duration=humanize_duration(max(fv, gv)))
    return 0


KINDS = {"theta": Kind.BIG_THETA, "O": Kind.BIG_O, "omega": Kind.BIG_OMEGA}


def cmd_classify(args) -> int:
    flags = classify(parse(args.f), parse(args.g), args.r)
    order = ["THETA", "O", "OMEGA", "SMALL_O", "SMALL_OMEGA"]
    names = [fl.value for fl in sorted(flags, key=lambda x: order.index(x.name))]
    _print(flags=",".join(names) if names else "none")
    return 0


def cmd_convert(args) -> int:
    if (args.q is None) == (not args.normalize):
        raise UsageError("give exactly one of --q or --normalize")
    cls = RClass(KINDS[args.kind], args.r, parse(args.base))
    out = convert(cls, 1.0 if args.normalize else args.q)
    _print(kind=args.kind, r=_fmt(out.r), base=render(out.base), scale=str(out.scale),
           bl=f"{implies_bl(out).kind.name}({render(out.base)})")
    return 0


def cmd_plot_data(args) -> int:
    rows = rio.read_dataset(args.data)
    fit, _ = rio.read_report(Path(args.report).read_text(), args.report)
    if not rows:
        raise UsageError(f"{args.data} has no rows")
    matching = [r for r in rows if args.label is None or r.label == args.label]
    if not matching:
        raise UsageError(f"no rows labelled {args.label!r}")
    data = [r for r in matching if r.metric is fit.metric]
    if not data:
        raise UsageError(f"report metric {fit.metric.value} does not match the dataset")
    if args.grid < 0:
        raise UsageError("--grid must be >= 0")
    lines = [f"# format={rio.FORMAT_VERSION}", "kind,n,measured,predicted"]
    for r in data:
        lines.append(f"sample,{r.n},{r.value!r},{evaluate(fit.model, r.n)!r}")
    if args.grid:
        lo, hi = min(r.n for r in data), max(r.n for r in data)
        for n in np.linspace(lo, hi, args.grid):
            lines.append(f"grid,{float(n)!r},,{evaluate(fit.model, float(n))!r}")
    _emit("\n".join(lines) + "\n", args.out, "plot-data.csv")
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcomplexity", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="time and measure a matrix kernel")
    b.add_argument("--kernel", help="naive, reordered (or loop-reordered, cache-friendly), "
                   "blocked or strassen")
    b.add_argument("--sizes", help="comma-separated matrix orders")
    b.add_argument("--reps", type=int)
    b.add_argument("--warmups", type=int)
    b.add_argument("--block-size", type=int)
    b.add_argument("--cutoff", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--label")
    b.add_argument("--config", help="key=value file with any of: " + ", ".join(sorted(BENCH_KEYS)))
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("fit", help="fit a complexity model to a dataset")
    f.add_argument("--data", required=True)
    mode = f.add_mutually_exclusive_group(required=True)
    mode.add_argument("--known", metavar="EXPR")
    mode.add_argument("--auto", action="store_true")
    f.add_argument("--library")
    f.add_argument("--metric", choices=[m.value for m in MetricKind], default="time_s")
    f.add_argument("--label")
    f.add_argument("--hz", type=float)
    f.add_argument("--arch-label")
    f.add_argument("--intercept", action="store_true")
    f.add_argument("--log-loss", action="store_true")
    f.add_argument("--trim-outliers", action="store_true")
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    metric_choices = ["rm1", "rm2", "erm1", "erm2"]
    e = sub.add_parser("estimate", help="expected cost over an input range")
    e.add_argument("--model")
    e.add_argument("--report", dest="report")
    e.add_argument("--metric", choices=metric_choices, required=True)
    e.add_argument("--range")
    e.add_argument("--weights")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("compare", help="compare two models over an input range")
    c.add_argument("--first")
    c.add_argument("--first-report")
    c.add_argument("--second")
    c.add_argument("--second-report")
    c.add_argument("--metric", choices=metric_choices, required=True)
    c.add_argument("--range")
    c.add_argument("--weights")
    c.add_argument("--tolerance", type=float, default=1e-6)
    c.set_defaults(func=cmd_compare)

    x = sub.add_parser("crossover", help="input size where two models meet")
    x.add_argument("--first", required=True)
    x.add_argument("--second", required=True)
    x.add_argument("--no-seconds", dest="seconds", action="store_false",
                   help="models are not in seconds; skip the duration line")
    x.set_defaults(func=cmd_crossover)

    k = sub.add_parser("classify", help="r-class membership of f relative to g")
    k.add_argument("--f", required=True)
    k.add_argument("--g", required=True)
    k.add_argument("--r", type=float, required=True)
    k.set_defaults(func=cmd_classify)

    v = sub.add_parser("convert", help="re-express a Big r-class at another r")
    v.add_argument("--kind", choices=sorted(KINDS), required=True)
    v.add_argument("--r", type=float, required=True)
    v.add_argument("--base", required=True)
    v.add_argument("--q", type=float)
    v.add_argument("--normalize", action="store_true")
    v.set_defaults(func=cmd_convert)

    d = sub.add_parser("plot-data", help="measured vs predicted CSV for external plotting")
    d.add_argument("--data", required=True)
    d.add_argument("--report", required=True)
    d.add_argument("--label")
    d.add_argument("--grid", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_plot_data)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except KernelCorrectnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ExpressionError, rio.FormatError, FitError, ValueError, OSError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
