"""Fit complexity coefficients to measured (input size, metric value) pairs."""

from __future__ import annotations

import enum
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ArchitectureProfile
from .expression import ComplexityFunction, Term, dominance_key

log = logging.getLogger(__name__)

CV_FOLDS = 5
TRIM_FRACTION = 0.02
OUTLIER_SIGMAS = 3.0


class FitError(ValueError):
    pass


class MetricKind(enum.Enum):
    TIME_SECONDS = "time_s"
    PEAK_MEMORY_BYTES = "mem_bytes"


class Method(enum.Enum):
    KNOWN_BL = "KnownBL"
    MODEL_SELECTION = "ModelSelection"


@dataclass(frozen=True)
class MeasurementSet:
    samples: tuple[tuple[int, float], ...]
    metric: MetricKind = MetricKind.TIME_SECONDS
    label: str = ""
    architecture: ArchitectureProfile | None = None

    def __post_init__(self):
        samples = tuple((int(n), float(v)) for n, v in self.samples)
        for n, v in samples:
            if n < 1:
                raise ValueError(f"input sizes must be positive, got {n}")
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"measured values must be positive and finite, got {v!r}")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_arrays(cls, n, values, **kw) -> MeasurementSet:
        return cls(tuple(zip(n, values)), **kw)

    @property
    def n(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples], dtype=float)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class FitResult:
    model: ComplexityFunction
    coefficients: tuple[float, ...]
    r_squared: float
    residual_std: float
    sample_count: int
    method: Method
    basis: tuple[ComplexityFunction, ...] = ()
    intercept: float | None = None
    cv_error: float | None = None
    metric: MetricKind = MetricKind.TIME_SECONDS
    architecture: ArchitectureProfile | None = None

    @property
    def cycle_coefficients(self) -> tuple[float, ...] | None:
        """Coefficients times the clock rate, i.e. cost in cycles."""
        if self.architecture is None:
            return None
        return tuple(c * self.architecture.frequency_hz for c in self.coefficients)


@dataclass(frozen=True)
class TermLibrary:
    powers: tuple[float, ...] = (0, 1, 1.5, 2, 2.5, 2.8, 3, 4)
    log_exponents: tuple[float, ...] = (0, 1, 2)
    log_bases: tuple[float, ...] = (2,)
    exp_bases: tuple[float, ...] = (1, 2)
    gamma_exponents: tuple[float, ...] = (0, 1)
    max_terms: int = 2

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    def terms(self) -> list[Term]:
        """Unit-coefficient candidate terms in a fixed enumeration order."""
        out = []
        for g, b, p, j in itertools.product(self.gamma_exponents, self.exp_bases,
                                            self.powers, self.log_exponents):
            bases = self.log_bases if j else (None,)
            for base in bases:
                out.append(Term(1.0, float(p), float(j), base, float(b), float(g)))
        return out


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    relative_errors: np.ndarray
    max_abs_relative_error: float
    flagged: tuple[int, ...] = field(default=())


def feature_transform(data: MeasurementSet, g: ComplexityFunction) -> list[tuple[float, float]]:
    """Map each ``(n, value)`` to ``(g(n), value)``; overflowing samples are dropped."""
    pairs = []
    for n, v in data.samples:
        x = g(n)
        if not math.isfinite(x):
            log.warning("g(%d) overflows; sample excluded", n)
            continue
        pairs.append((x, v))
    return pairs


def _lstsq(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    if X.shape[1] == 1:
        x = X[:, 0]
        return np.array([np.dot(x, y) / np.dot(x, x)])
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    coef, *_ = np.linalg.lstsq(X / scale, y, rcond=None)
    return coef / scale


def _log_lstsq(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    if X.shape[1] == 1:
        return np.array([math.exp(np.mean(np.log(y) - np.log(X[:, 0])))])
    from scipy.optimize import least_squares

    start = np.abs(_lstsq(X, y)) + 1e-300
    res = least_squares(lambda th: np.log(X @ np.exp(th)) - np.log(y), np.log(start))
    return np.exp(res.x)


def _solve(X: np.ndarray, y: np.ndarray, log_loss: bool) -> np.ndarray:
    return _log_lstsq(X, y) if log_loss else _lstsq(X, y)


def _solve_relative(X: np.ndarray, y: np.ndarray, log_loss: bool) -> np.ndarray:
    """Least squares on residuals divided by ``y`` (multiplicative noise)."""
    return _log_lstsq(X, y) if log_loss else _lstsq(X / y[:, None], np.ones(len(y)))


def _diagnostics(y: np.ndarray, pred: np.ndarray, n_params: int) -> tuple[float, float]:
    resid = y - pred
    ss_res = float(np.dot(resid, resid))
    centred = y - y.mean()
    ss_tot = float(np.dot(centred, centred))
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else -math.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    dof = max(len(y) - n_params, 1)
    return r2, math.sqrt(ss_res / dof)


def _design(data: MeasurementSet, g: ComplexityFunction, intercept: bool):
    n = data.n
    x = g.values(n)
    keep = np.isfinite(x)
    for i in np.flatnonzero(~keep):
        log.warning("g(%d) overflows; sample excluded", int(n[i]))
    X = x[keep, None]
    if intercept:
        X = np.column_stack([X, np.ones(len(X))])
    return X, data.values[keep], keep


def fit_known(data: MeasurementSet, g: ComplexityFunction, *, intercept: bool = False,
              log_loss: bool = False, trim_outliers: bool = False) -> FitResult:
    """Fit ``value ~ c * g(n)`` (plus a constant when ``intercept``)."""
    X, y, _ = _design(data, g, intercept)
    if len(y) == 0:
        raise FitError("every sample overflowed the feature transform")
    if len(y) < 3:
        raise FitError(f"need at least 3 usable samples, got {len(y)}")
    if np.all(X[:, 0] == X[0, 0]):
        raise FitError("singular design: g(n) takes a single value on the data")
    if log_loss and intercept:
        raise FitError("log-domain loss does not support an intercept")

    coef = _solve(X, y, log_loss)
    if trim_outliers:
        resid = np.abs(y - X @ coef)
        drop = max(1, math.ceil(TRIM_FRACTION * len(y)))
        keep = np.sort(np.argsort(resid, kind="stable")[:len(y) - drop])
        X, y = X[keep], y[keep]
        coef = _solve(X, y, log_loss)

    if not np.all(coef > 0):
        raise FitError(f"no admissible fit: coefficients {coef.tolist()} are not all positive")
    c = float(coef[0])
    r2, std = _diagnostics(y, X @ coef, len(coef))
    terms = [t.scaled(c) for t in g.terms]
    icpt = None
    if intercept:
        icpt = float(coef[1])
        terms.append(Term(icpt))
    return FitResult(
        model=ComplexityFunction(tuple(terms), g.variable),
        coefficients=(c,),
        r_squared=r2,
        residual_std=std,
        sample_count=len(y),
        method=Method.KNOWN_BL,
        basis=(g,),
        intercept=icpt,
        metric=data.metric,
        architecture=data.architecture,
    )


# ---------------------------------------------------------- model selection

@dataclass(frozen=True)
class _Candidate:
    columns: tuple[int, ...]
    coef: np.ndarray | None
    score: float
    score_se: float = math.inf


def _cv_score(X: np.ndarray, y: np.ndarray, log_loss: bool) -> tuple[float, float]:
    """RMS out-of-fold error and the standard error of the per-fold RMS values."""
    folds = np.arange(len(y)) % CV_FOLDS
    errs = np.empty(len(y))
    for k in range(CV_FOLDS):
        test = folds == k
        if not test.any():
            continue
        coef = _solve_relative(X[~test], y[~test], log_loss)
        pred = X[test] @ coef
        if log_loss:
            with np.errstate(divide="ignore", invalid="ignore"):
                errs[test] = np.log(np.where(pred > 0, pred, np.nan)) - np.log(y[test])
        else:
            errs[test] = (pred - y[test]) / y[test]
    rmse = math.sqrt(float(np.mean(errs ** 2)))
    if not math.isfinite(rmse):
        return math.inf, math.inf
    per_fold = [math.sqrt(float(np.mean(errs[folds == k] ** 2)))
                for k in range(CV_FOLDS) if np.any(folds == k)]
    se = float(np.std(per_fold, ddof=1)) / math.sqrt(len(per_fold)) if len(per_fold) > 1 else 0.0
    return rmse, se


def _evaluate_candidate(cols, F, y, log_loss) -> _Candidate:
    X = F[:, cols]
    coef = _solve_relative(X, y, log_loss)
    if not np.all(coef > 0):
        return _Candidate(cols, None, math.inf)
    return _Candidate(cols, coef, *_cv_score(X, y, log_loss))


def fit_unknown(data: MeasurementSet, library: TermLibrary | None = None, *,
                log_loss: bool = False, tie_tolerance: float = 0.02,
                n_jobs: int = 1) -> FitResult:
    """Pick the best model of up to ``library.max_terms`` terms by 5-fold CV.

    Folds are assigned by sample index modulo 5 and scored by the RMS relative
    prediction error (log error with ``log_loss``), so small and large sizes
    weigh alike. Candidates within ``tie_tolerance`` (relative) of the best
    score, or within one standard error of it, are treated as ties and resolved
    toward fewer terms, then lower growth.
    """
    library = library or TermLibrary()
    y = data.values
    if len(y) < 8 or len(set(data.n.tolist())) < 4:
        raise FitError("model selection needs >= 8 samples over >= 4 distinct sizes")

    prims = library.terms()
    with np.errstate(over="ignore", invalid="ignore"):
        F = np.column_stack([t.values(data.n) for t in prims])
    usable = [i for i in range(len(prims)) if np.all(np.isfinite(F[:, i])) and np.any(F[:, i] > 0)]
    combos = [c for k in range(1, library.max_terms + 1)
              for c in itertools.combinations(usable, k)]

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(lambda c: _evaluate_candidate(c, F, y, log_loss), combos))
    else:
        results = [_evaluate_candidate(c, F, y, log_loss) for c in combos]

    admissible = [r for r in results if r.coef is not None and math.isfinite(r.score)]
    if not admissible:
        raise FitError("no admissible model: no candidate fits with positive coefficients")

    best = min(admissible, key=lambda r: r.score)
    band = max(best.score * (1 + tie_tolerance), best.score + best.score_se) + 1e-9
    tied = [r for r in admissible if r.score <= band]

    def rank(r: _Candidate):
        growths = sorted((prims[i].growth for i in r.columns), reverse=True)
        return (len(r.columns), growths)

    chosen = min(tied, key=rank)  # min is stable: enumeration order breaks exact ties
    X = F[:, chosen.columns]
    pred = X @ chosen.coef
    r2, std = _diagnostics(y, pred, len(chosen.columns))
    pairs = sorted(zip(chosen.columns, (float(c) for c in chosen.coef)),
                   key=lambda ic: dominance_key(prims[ic[0]]))
    model = ComplexityFunction(tuple(prims[i].scaled(c) for i, c in pairs))
    return FitResult(
        model=model,
        coefficients=tuple(c for _, c in pairs),
        r_squared=r2,
        residual_std=std,
        sample_count=len(y),
        method=Method.MODEL_SELECTION,
        basis=tuple(ComplexityFunction((prims[i],)) for i, _ in pairs),
        cv_error=chosen.score,
        metric=data.metric,
        architecture=data.architecture,
    )


def residual_report(fit: FitResult, data: MeasurementSet) -> ResidualReport:
    y = data.values
    pred = fit.model.values(data.n)
    resid = y - pred
    rel = resid / y
    limit = OUTLIER_SIGMAS * fit.residual_std
    flagged = tuple(int(i) for i in np.flatnonzero(np.abs(resid) > limit)) if limit > 0 else ()
    return ResidualReport(resid, rel, float(np.max(np.abs(rel))) if len(rel) else 0.0, flagged)
