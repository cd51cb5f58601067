import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from rcomplexity.expression import ComplexityFunction, Term


def oracle_values(f: ComplexityFunction, n: np.ndarray) -> np.ndarray:
    """Direct numpy evaluation of the normal form, independent of the library code."""
    n = np.asarray(n, dtype=float)
    total = np.zeros_like(n)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in f.terms:
            v = t.coefficient * n ** t.power
            if t.log_exponent:
                v = v * (np.log(n) / np.log(t.log_base)) ** t.log_exponent
            v = v * t.exp_base ** n
            if t.gamma_exponent:
                v = v * gamma_fn(n + t.gamma_shift) ** t.gamma_exponent
            total = total + v
    return total


def trapezoid(f: ComplexityFunction, a: float, b: float, panels: int = 10**6) -> float:
    x = np.linspace(a, b, panels + 1)
    y = oracle_values(f, x)
    return float((b - a) / panels * (y.sum() - (y[0] + y[-1]) / 2))


def random_term(rng: np.random.Generator) -> Term:
    power = float(rng.choice([0, 0.5, 1, 1.5, 2, 2.5, 2.8, 3, 4]) if rng.random() < 0.6
                  else rng.uniform(0, 4))
    log_exp = float(rng.choice([0, 0, 1, 2]))
    base = float(rng.choice([2, math.e, 10])) if log_exp else None
    exp_base = float(rng.choice([1, 1, 1, 1.01, 1.5, 2]))
    gamma_exp = float(rng.choice([0, 0, 0, 0, 1]))
    shift = int(rng.integers(0, 2)) if gamma_exp else 0
    coef = float(10 ** rng.uniform(-9, 3))
    return Term(coef, power, log_exp, base, exp_base, gamma_exp, shift)


def random_function(rng: np.random.Generator, max_terms: int = 3) -> ComplexityFunction:
    k = int(rng.integers(1, max_terms + 1))
    return ComplexityFunction(tuple(random_term(rng) for _ in range(k)))


def random_interval(rng: np.random.Generator, f: ComplexityFunction, lo: int = 1, hi: int = 10**4):
    """Integer interval inside [lo, hi] on which f stays far from overflow."""
    cap = hi
    while cap > lo + 1 and not (oracle_values(f, np.array([float(cap)]))[0] < 1e250):
        cap = lo + 1 + (cap - lo - 1) // 2
    a = int(rng.integers(lo, cap))
    b = int(rng.integers(a + 1, cap + 1))
    return a, b


@pytest.fixture
def rng():
    return np.random.default_rng(20201014)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
