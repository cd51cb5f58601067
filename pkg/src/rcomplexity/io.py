"""Dataset, report and config file formats.

Datasets are CSV with a mandatory header ``label,metric,n,value,repetitions,timestamp``
preceded by a ``# format=1`` line. Reports, weight files and term-library
files share one line grammar::

    # comment
    key = value

Blank lines and ``#`` lines are ignored, keys are unique, list values are
comma separated, and ``format`` (when present) must be ``1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from . import __version__
from .core import ArchitectureProfile
from .estimators import PointWeights, SubintervalWeights
from .expression import ComplexityFunction, parse, render
from .fitting import FitResult, MeasurementSet, Method, MetricKind, TermLibrary

FORMAT_VERSION = 1
DATASET_COLUMNS = ("label", "metric", "n", "value", "repetitions", "timestamp")


class FormatError(ValueError):
    pass


# ------------------------------------------------------------------ datasets

@dataclass(frozen=True)
class DatasetRow:
    label: str
    metric: MetricKind
    n: int
    value: float
    repetitions: int = 1
    timestamp: str = ""


def write_dataset(rows: Iterable[DatasetRow], out: TextIO) -> None:
    out.write(f"# format={FORMAT_VERSION}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(DATASET_COLUMNS)
    for r in rows:
        w.writerow([r.label, r.metric.value, r.n, repr(float(r.value)), r.repetitions, r.timestamp])


def _check_format_line(line: str, where: str) -> None:
    body = line.lstrip("#").strip()
    if body.startswith("format"):
        key, _, value = body.partition("=")
        if key.strip() == "format" and value.strip() != str(FORMAT_VERSION):
            raise FormatError(f"{where}: unsupported format {value.strip()!r}")


def read_dataset(source: TextIO | str | Path) -> list[DatasetRow]:
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_dataset(fh)

    def without_comments():
        for lineno, line in enumerate(source, 1):
            if line.startswith("#"):
                _check_format_line(line, f"line {lineno}")
                yield "\n"  # keeps reader.line_num aligned with the file
            else:
                yield line

    reader = csv.reader(without_comments())
    header = None
    rows = []
    for record in reader:
        lineno = reader.line_num
        if not record or all(not c.strip() for c in record):
            continue
        if header is None:
            header = tuple(c.strip() for c in record)
            unknown = set(header) - set(DATASET_COLUMNS)
            missing = set(DATASET_COLUMNS) - set(header)
            if unknown or missing:
                raise FormatError(
                    f"line {lineno}: bad header (unknown {sorted(unknown)}, missing {sorted(missing)})")
            continue
        if len(record) != len(header):
            raise FormatError(f"line {lineno}: expected {len(header)} fields, got {len(record)}")
        rows.append(_parse_row(dict(zip(header, (c.strip() for c in record))), lineno))
    if header is None:
        raise FormatError("dataset has no header")
    return rows


def _parse_row(d: dict[str, str], lineno: int) -> DatasetRow:
    try:
        metric = MetricKind(d["metric"])
    except ValueError:
        raise FormatError(f"line {lineno}: unknown metric {d['metric']!r}") from None
    try:
        n = int(d["n"])
        value = float(d["value"])
        reps = int(d["repetitions"]) if d["repetitions"] else 1
    except ValueError as exc:
        raise FormatError(f"line {lineno}: {exc}") from None
    if n < 1:
        raise FormatError(f"line {lineno}: n must be a positive integer")
    if not (value > 0 and math.isfinite(value)):
        raise FormatError(f"line {lineno}: value must be a positive real")
    return DatasetRow(d["label"], metric, n, value, reps, d["timestamp"])


def rows_to_measurements(rows: Iterable[DatasetRow], metric: MetricKind,
                         label: str | None = None,
                         architecture: ArchitectureProfile | None = None) -> MeasurementSet:
    chosen = [r for r in rows if r.metric is metric and (label is None or r.label == label)]
    labels = sorted({r.label for r in chosen})
    return MeasurementSet(tuple((r.n, r.value) for r in chosen), metric,
                          label if label is not None else ",".join(labels), architecture)


# --------------------------------------------------------------- key=value

def parse_config(text: str, where: str = "config") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise FormatError(f"{where}:{lineno}: expected 'key = value'")
        if key in out:
            raise FormatError(f"{where}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    if out.get("format", str(FORMAT_VERSION)) != str(FORMAT_VERSION):
        raise FormatError(f"{where}: unsupported format {out['format']!r}")
    return out


def dump_config(items: dict[str, object]) -> str:
    lines = [f"format={FORMAT_VERSION}"]
    for key, value in items.items():
        lines.append(f"{key}={'' if value is None else value}")
    return "\n".join(lines) + "\n"


def _floats(text: str, key: str, where: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise FormatError(f"{where}: {key} must be a comma-separated list of numbers") from None


def _ints(text: str, key: str, where: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise FormatError(f"{where}: {key} must be a comma-separated list of integers") from None


def read_weights(text: str, where: str = "weights") -> PointWeights | SubintervalWeights:
    """``mode = points`` with ``weights``, or ``mode = subintervals`` with ``knots`` and ``weights``."""
    cfg = parse_config(text, where)
    allowed = {"format", "mode", "weights", "knots"}
    if set(cfg) - allowed:
        raise FormatError(f"{where}: unknown keys {sorted(set(cfg) - allowed)}")
    mode = cfg.get("mode")
    if "weights" not in cfg:
        raise FormatError(f"{where}: missing 'weights'")
    weights = _floats(cfg["weights"], "weights", where)
    try:
        if mode == "points":
            if "knots" in cfg:
                raise FormatError(f"{where}: 'knots' only applies to mode = subintervals")
            return PointWeights(weights)
        if mode == "subintervals":
            if "knots" not in cfg:
                raise FormatError(f"{where}: mode = subintervals needs 'knots'")
            return SubintervalWeights(_ints(cfg["knots"], "knots", where), weights)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None
    raise FormatError(f"{where}: mode must be 'points' or 'subintervals', got {mode!r}")


def read_library(text: str, where: str = "library") -> TermLibrary:
    cfg = parse_config(text, where)
    fields = {"powers", "log_exponents", "log_bases", "exp_bases", "gamma_exponents"}
    unknown = set(cfg) - fields - {"format", "max_terms"}
    if unknown:
        raise FormatError(f"{where}: unknown keys {sorted(unknown)}")
    kw = {k: _floats(v, k, where) for k, v in cfg.items() if k in fields}
    if "max_terms" in cfg:
        kw["max_terms"] = _ints(cfg["max_terms"], "max_terms", where)[0]
    try:
        return TermLibrary(**kw)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


# ------------------------------------------------------------------ reports

def _num(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def dump_report(fit: FitResult, label: str = "") -> str:
    arch = fit.architecture
    items: dict[str, object] = {
        "tool_version": __version__,
        "method": fit.method.value,
        "metric": fit.metric.value,
        "label": label,
        "model": render(fit.model),
        "basis": "; ".join(render(g) for g in fit.basis),
        "coefficients": ",".join(repr(c) for c in fit.coefficients),
        "intercept": _num(fit.intercept),
        "r_squared": _num(fit.r_squared),
        "residual_std": _num(fit.residual_std),
        "sample_count": fit.sample_count,
        "cv_error": _num(fit.cv_error),
        "frequency_hz": _num(arch.frequency_hz) if arch else "",
        "architecture": arch.label if arch else "",
    }
    if fit.cycle_coefficients is not None:
        items["cycle_coefficients"] = ",".join(repr(c) for c in fit.cycle_coefficients)
    return dump_config(items)


def _opt_float(cfg: dict[str, str], key: str) -> float | None:
    v = cfg.get(key, "")
    return float(v) if v else None


def read_report(text: str, where: str = "report") -> tuple[FitResult, str]:
    cfg = parse_config(text, where)
    if "model" not in cfg:
        raise FormatError(f"{where}: missing 'model'")
    try:
        model = parse(cfg["model"])
        basis = tuple(parse(s) for s in cfg.get("basis", "").split(";") if s.strip())
        freq = _opt_float(cfg, "frequency_hz")
        arch = ArchitectureProfile(freq, cfg.get("architecture", "")) if freq else None
        fit = FitResult(
            model=model,
            coefficients=_floats(cfg.get("coefficients", ""), "coefficients", where),
            r_squared=_opt_float(cfg, "r_squared") if cfg.get("r_squared") else math.nan,
            residual_std=_opt_float(cfg, "residual_std") if cfg.get("residual_std") else math.nan,
            sample_count=int(cfg.get("sample_count") or 0),
            method=Method(cfg.get("method", Method.KNOWN_BL.value)),
            basis=basis,
            intercept=_opt_float(cfg, "intercept"),
            cv_error=_opt_float(cfg, "cv_error"),
            metric=MetricKind(cfg.get("metric", MetricKind.TIME_SECONDS.value)),
            architecture=arch,
        )
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None
    return fit, cfg.get("label", "")


def model_from_report(text: str) -> ComplexityFunction:
    return read_report(text)[0].model
