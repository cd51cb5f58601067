"""Expected-cost estimators over a bounded input range, verdicts, crossovers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import ArchitectureProfile, asymptotic_ratio_limit
from .expression import LOG10_MAX, ComplexityFunction, Term, evaluate, log10_evaluate

WEIGHT_SUM_TOL = 1e-9
QUAD_TOL = 1e-9
QUAD_MAX_DEPTH = 60
QUAD_START_PANELS = 16
DEFAULT_EQUIVALENCE_TOL = 1e-6
CROSSOVER_UPPER = 2.0 ** 64
CROSSOVER_SAMPLES = 4096


class Metric(enum.Enum):
    RM1 = "rm1"
    RM2 = "rm2"
    ERM1 = "erm1"
    ERM2 = "erm2"


class Outcome(enum.Enum):
    FIRST_FASTER = "FirstFaster"
    SECOND_FASTER = "SecondFaster"
    EQUIVALENT = "Equivalent"


@dataclass(frozen=True)
class Interval:
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.n_min < 0:
            raise ValueError("interval bounds must be non-negative")
        if self.n_min > self.n_max:
            raise ValueError(f"empty interval [{self.n_min}, {self.n_max}]")

    @property
    def width(self) -> int:
        return self.n_max - self.n_min


@dataclass(frozen=True)
class PointWeights:
    """One probability per input size n_min, n_min + 1, ..., n_max."""

    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _check_weights(self.weights)


@dataclass(frozen=True)
class SubintervalWeights:
    """One probability per subinterval [knots[k], knots[k+1]]."""

    knots: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "knots", tuple(int(k) for k in self.knots))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.knots) < 2:
            raise ValueError("need at least two knots")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")
        if len(self.weights) != len(self.knots) - 1:
            raise ValueError(
                f"{len(self.knots)} knots need {len(self.knots) - 1} weights, got {len(self.weights)}")
        _check_weights(self.weights)

    @property
    def interval(self) -> Interval:
        return Interval(self.knots[0], self.knots[-1])


def _check_weights(weights: Sequence[float]) -> None:
    if not weights:
        raise ValueError("no weights given")
    if any(not (w >= 0 and math.isfinite(w)) for w in weights):
        raise ValueError("weights must be finite and non-negative")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights sum to {total!r}, expected 1")


@dataclass(frozen=True)
class IntervalEstimate:
    value: float
    metric: Metric
    interval: Interval

    @property
    def overflow(self) -> bool:
        return math.isinf(self.value)


@dataclass(frozen=True)
class Verdict:
    ratio: float
    outcome: Outcome


@dataclass(frozen=True)
class CrossoverResult:
    n0: float | None
    exists: bool
    bracket: tuple[float, float] | None = None
    reason: str = ""


@dataclass(frozen=True)
class Extrapolation:
    n: float
    value: float
    log10_value: float
    cycles: float | None = None
    log10_cycles: float | None = None

    @property
    def overflow(self) -> bool:
        return math.isinf(self.value)


# ---------------------------------------------------------------- integrals

def adaptive_simpson(func: Callable[[float], float], a: float, b: float,
                     tol: float = QUAD_TOL, max_depth: int = QUAD_MAX_DEPTH) -> float:
    """Integral of ``func`` over [a, b] to absolute/relative tolerance ``tol``.

    The range is first cut into a few fixed panels so a lucky agreement of
    the very first Simpson pair cannot end the refinement early.
    """
    if a == b:
        return 0.0
    xs = np.linspace(a, b, 2 * QUAD_START_PANELS + 1)
    fx = [func(float(x)) for x in xs]
    if not all(math.isfinite(v) for v in fx):
        return math.inf
    panels = []
    for i in range(QUAD_START_PANELS):
        lo, mid, hi = (float(xs[2 * i + k]) for k in range(3))
        fa, fm, fb = fx[2 * i], fx[2 * i + 1], fx[2 * i + 2]
        panels.append((lo, hi, fa, fm, fb, (hi - lo) / 6 * (fa + 4 * fm + fb)))
    estimate = math.fsum(p[-1] for p in panels)
    eps = max(tol, tol * abs(estimate)) / QUAD_START_PANELS
    return math.fsum(_simpson(func, *p, eps, max_depth) for p in panels)


def _simpson(func, a, b, fa, fm, fb, whole, eps, depth):
    m = (a + b) / 2
    flm, frm = func((a + m) / 2), func((m + b) / 2)
    left = (m - a) / 6 * (fa + 4 * flm + fm)
    right = (b - m) / 6 * (fm + 4 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15 * eps or not math.isfinite(delta):
        return left + right + delta / 15
    return (_simpson(func, a, m, fa, flm, fm, left, eps / 2, depth - 1)
            + _simpson(func, m, b, fm, frm, fb, right, eps / 2, depth - 1))


def _power_integral(t: Term, a: float, b: float) -> float:
    q = t.power + 1
    try:
        return t.coefficient * (b ** q - a ** q) / q
    except OverflowError:
        return math.inf


def integrate(g: ComplexityFunction, a: float, b: float) -> float:
    """Integral of ``g`` over [a, b]: closed form for ``c*n^p`` terms, quadrature otherwise."""
    parts = [_power_integral(t, a, b) for t in g.terms if t.is_power]
    rest = [t for t in g.terms if not t.is_power]
    if rest:
        parts.append(adaptive_simpson(lambda x: math.fsum(t.value(x) for t in rest), a, b))
    return math.fsum(parts)


# --------------------------------------------------------------- estimators

def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def rm1(g1: ComplexityFunction, interval: Interval) -> IntervalEstimate:
    """Arithmetic mean of ``g1`` over the integer sizes of ``interval``."""
    values = [evaluate(g1, n) for n in range(interval.n_min, interval.n_max + 1)]
    return IntervalEstimate(_mean(values), Metric.RM1, interval)


def rm2(g1: ComplexityFunction, interval: Interval) -> IntervalEstimate:
    """Integral mean of ``g1`` over ``interval``."""
    if interval.width == 0:
        raise ValueError("rm2 needs n_max > n_min")
    total = integrate(g1, interval.n_min, interval.n_max)
    return IntervalEstimate(total / interval.width, Metric.RM2, interval)


def erm1(g1: ComplexityFunction, interval: Interval, weights: PointWeights) -> IntervalEstimate:
    """Weighted mean with one weight per size ``n_min .. n_max``.

    Equal weights are summed exactly like :func:`rm1`.
    """
    w = weights.weights
    if len(w) != interval.width + 1:
        raise ValueError(f"interval has {interval.width + 1} sizes but {len(w)} weights were given")
    values = [evaluate(g1, n) for n in range(interval.n_min, interval.n_max + 1)]
    if len(set(w)) == 1:
        value = _mean(values)
    else:
        value = math.fsum(p * v for p, v in zip(w, values) if p)
    return IntervalEstimate(value, Metric.ERM1, interval)


def erm2(g1: ComplexityFunction, weights: SubintervalWeights,
         normalized: bool = False) -> IntervalEstimate:
    """``sum_k p_k * integral(g1, n_k, n_k+1)``.

    With ``normalized`` each integral is divided by its subinterval length,
    giving a weighted mean comparable with :func:`rm2`.
    """
    k = weights.knots
    parts = []
    for p, a, b in zip(weights.weights, k, k[1:]):
        if not p:
            continue
        area = integrate(g1, a, b)
        parts.append(p * (area / (b - a) if normalized else area))
    return IntervalEstimate(math.fsum(parts), Metric.ERM2, weights.interval)


def compare(t1: IntervalEstimate, t2: IntervalEstimate,
            tolerance: float = DEFAULT_EQUIVALENCE_TOL) -> Verdict:
    if t1.metric != t2.metric:
        raise ValueError(f"cannot compare {t1.metric.value} with {t2.metric.value}")
    if t1.interval != t2.interval:
        raise ValueError("estimates cover different intervals")
    if not t2.value > 0:
        raise ValueError("second estimate must be positive")
    ratio = t1.value / t2.value
    # symmetric band, so swapping operands mirrors the outcome exactly
    if abs(t1.value - t2.value) <= tolerance * max(t1.value, t2.value):
        outcome = Outcome.EQUIVALENT
    elif t1.value < t2.value:
        outcome = Outcome.FIRST_FASTER
    else:
        outcome = Outcome.SECOND_FASTER
    return Verdict(ratio, outcome)


# ---------------------------------------------------------------- crossover

def _log_gap(f: ComplexityFunction, g: ComplexityFunction, n: float) -> float:
    return log10_evaluate(f, n) - log10_evaluate(g, n)


def crossover(f: ComplexityFunction, g: ComplexityFunction) -> CrossoverResult:
    """Smallest n >= 1 where ``f(n) = g(n)``, searched up to 2^64."""
    if f.terms == g.terms:
        return CrossoverResult(None, False, reason="identical")
    if f.is_monomial and g.is_monomial:
        return _monomial_crossover(f.leading, g.leading)

    xs = np.geomspace(1.0, CROSSOVER_UPPER, CROSSOVER_SAMPLES + 1)
    prev_n, prev_h = None, None
    for n in xs:
        n = float(n)
        h = _log_gap(f, g, n)
        if not math.isfinite(h):
            continue
        if h == 0:
            return CrossoverResult(n, True, (n, n))
        if prev_h is not None and (h > 0) != (prev_h > 0):
            n0 = brentq(lambda x: _log_gap(f, g, x), prev_n, n, xtol=1e-300, rtol=1e-15, maxiter=500)
            return CrossoverResult(n0, True, (prev_n, n))
        prev_n, prev_h = n, h

    limit = asymptotic_ratio_limit(f, g)
    heading_across = prev_h is not None and ((prev_h > 0 and limit < 1) or (prev_h < 0 and limit > 1))
    reason = "beyond search bound" if heading_across else "no crossing"
    return CrossoverResult(None, False, (1.0, CROSSOVER_UPPER), reason)


def _monomial_crossover(a: Term, b: Term) -> CrossoverResult:
    if a.power == b.power:
        return CrossoverResult(None, False, reason="parallel monomials never meet")
    n0 = (a.coefficient / b.coefficient) ** (1.0 / (b.power - a.power))
    if n0 < 1:
        return CrossoverResult(None, False, reason="crossing below n = 1")
    if n0 > CROSSOVER_UPPER:
        return CrossoverResult(None, False, reason="beyond search bound")
    return CrossoverResult(n0, True, (n0, n0))


# -------------------------------------------------------------- extrapolate

def extrapolate(model: ComplexityFunction, n: float,
                arch: ArchitectureProfile | None = None) -> Extrapolation:
    """Evaluate ``model`` at a (possibly astronomical) size in log space."""
    if n < 1:
        raise ValueError("extrapolation needs n >= 1")
    lv = log10_evaluate(model, n)
    value = math.inf if lv > LOG10_MAX else 10.0 ** lv
    if arch is None:
        return Extrapolation(n, value, lv)
    lc = lv + math.log10(arch.frequency_hz)
    cycles = math.inf if lc > LOG10_MAX else 10.0 ** lc
    return Extrapolation(n, value, lv, cycles, lc)
