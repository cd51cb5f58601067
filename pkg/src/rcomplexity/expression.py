"""Normal-form complexity functions.

A complexity function is a finite sum of terms

    c * n^p * log_l(n)^j * b^n * gamma(n + s)^g

with ``s`` in {0, 1} (``gamma(n+1)`` is ``n!``). Terms are kept sorted from
the asymptotically dominant one downwards, which is what every comparison in
:mod:`rcomplexity.core` relies on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np
from scipy.special import gamma, gammaln

LN10 = math.log(10.0)
# log10 of the largest finite double
LOG10_MAX = math.log10(np.finfo(float).max)


class ExpressionError(ValueError):
    """Raised for malformed expression text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class Term:
    coefficient: float
    power: float = 0.0
    log_exponent: float = 0.0
    log_base: float | None = None
    exp_base: float = 1.0
    gamma_exponent: float = 0.0
    gamma_shift: int = 0

    def __post_init__(self):
        if not (self.coefficient > 0 and math.isfinite(self.coefficient)):
            raise ValueError(f"coefficient must be positive and finite, got {self.coefficient!r}")
        if self.power < 0 or self.log_exponent < 0 or self.gamma_exponent < 0:
            raise ValueError("power, log exponent and gamma exponent must be >= 0")
        if self.exp_base < 1:
            raise ValueError(f"exponential base must be >= 1, got {self.exp_base!r}")
        if self.gamma_shift not in (0, 1):
            raise ValueError("gamma_shift must be 0 or 1")
        if self.log_exponent > 0:
            if self.log_base is None:
                raise ValueError("a log exponent requires a log base")
            if not self.log_base > 1:
                raise ValueError(f"log base must be > 1, got {self.log_base!r}")
        # canonical spelling: no dangling base / shift without the factor it modifies
        if self.log_exponent == 0 and self.log_base is not None:
            object.__setattr__(self, "log_base", None)
        if self.gamma_exponent == 0 and self.gamma_shift:
            object.__setattr__(self, "gamma_shift", 0)

    @property
    def shape(self) -> tuple:
        """Everything except the coefficient; terms with equal shape merge."""
        return (self.power, self.log_exponent, self.log_base, self.exp_base,
                self.gamma_exponent, self.gamma_shift)

    @property
    def growth(self) -> tuple[float, float, float, float]:
        """Dominance key ``(gamma, exp base, power, log exponent)``.

        gamma(n+1)^g equals n^g * gamma(n)^g, so the shift is folded into the
        power. Log bases only change constants and are left out.
        """
        return (self.gamma_exponent, self.exp_base,
                self.power + self.gamma_exponent * self.gamma_shift, self.log_exponent)

    @property
    def canonical_coefficient(self) -> float:
        """Coefficient with the log factor rewritten as ``ln(n)^j``."""
        if self.log_exponent == 0:
            return self.coefficient
        return self.coefficient / math.log(self.log_base) ** self.log_exponent

    @property
    def is_constant(self) -> bool:
        return self.growth == (0.0, 1.0, 0.0, 0.0)

    @property
    def is_power(self) -> bool:
        """True for a pure ``c * n^p`` term."""
        return self.log_exponent == 0 and self.exp_base == 1 and self.gamma_exponent == 0

    def scaled(self, factor: float) -> Term:
        return replace(self, coefficient=self.coefficient * factor)

    def log10_value(self, n: float) -> float:
        """log10 of the term at ``n``; ``-inf`` where the term vanishes."""
        _check_domain(self, n)
        out = math.log10(self.coefficient)
        if self.power:
            if n == 0:
                return -math.inf
            out += self.power * math.log10(n)
        if self.log_exponent:
            lg = math.log(n) / math.log(self.log_base)
            if lg == 0:
                return -math.inf
            out += self.log_exponent * math.log10(lg)
        if self.exp_base != 1:
            out += n * math.log10(self.exp_base)
        if self.gamma_exponent:
            out += self.gamma_exponent * math.lgamma(n + self.gamma_shift) / LN10
        return out

    def value(self, n: float) -> float:
        _check_domain(self, n)
        try:
            v = self.coefficient
            if self.power:
                v *= float(n) ** self.power
            if self.log_exponent:
                v *= (math.log(n) / math.log(self.log_base)) ** self.log_exponent
            if self.exp_base != 1:
                v *= self.exp_base ** n
            if self.gamma_exponent:
                v *= math.gamma(n + self.gamma_shift) ** self.gamma_exponent
        except OverflowError:
            v = math.inf
        if math.isfinite(v) and v > 0:
            return v
        if v == 0 and self.log10_value(n) == -math.inf:
            return 0.0
        # intermediate under/overflow: redo in log space
        lv = self.log10_value(n)
        return math.inf if lv > LOG10_MAX else 10.0 ** lv

    def values(self, n: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`value` for arrays of inputs."""
        n = np.asarray(n, dtype=float)
        if np.any(n < 0):
            raise ValueError("complexity functions are defined for n >= 0")
        if (self.log_exponent or (self.gamma_exponent and not self.gamma_shift)) and np.any(n == 0):
            raise ValueError("log and gamma(n) factors are undefined at n = 0")
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = np.full(n.shape, self.coefficient)
            logv = np.full(n.shape, math.log(self.coefficient))
            if self.power:
                out = out * n ** self.power
                logv = logv + self.power * np.log(n)
            if self.log_exponent:
                lg = np.log(n) / math.log(self.log_base)
                out = out * lg ** self.log_exponent
                logv = logv + self.log_exponent * np.log(lg)
            if self.exp_base != 1:
                out = out * self.exp_base ** n
                logv = logv + n * math.log(self.exp_base)
            if self.gamma_exponent:
                out = out * gamma(n + self.gamma_shift) ** self.gamma_exponent
                logv = logv + self.gamma_exponent * gammaln(n + self.gamma_shift)
            bad = ~np.isfinite(out)
            out[bad] = np.exp(logv[bad])
        return out


def _check_domain(term: Term, n: float) -> None:
    if n < 0 or math.isnan(n):
        raise ValueError(f"complexity functions are defined for n >= 0, got {n!r}")
    if n == 0 and term.log_exponent:
        raise ValueError("log factor is undefined at n = 0")
    if n == 0 and term.gamma_exponent and not term.gamma_shift:
        raise ValueError("gamma(n) is undefined at n = 0")


def dominance_key(term: Term) -> tuple:
    """Sort key placing dominant terms first."""
    # descending growth, ties broken deterministically on the remaining shape
    return tuple(-x for x in term.growth) + (
        -(term.log_base or 0.0), -term.gamma_shift)


@dataclass(frozen=True)
class ComplexityFunction:
    terms: tuple[Term, ...]
    variable: str = field(default="n")

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a complexity function needs at least one term")
        merged: dict[tuple, Term] = {}
        for t in self.terms:
            if t.shape in merged:
                prev = merged[t.shape]
                merged[t.shape] = replace(prev, coefficient=prev.coefficient + t.coefficient)
            else:
                merged[t.shape] = t
        object.__setattr__(self, "terms", tuple(sorted(merged.values(), key=dominance_key)))

    @classmethod
    def of(cls, *terms: Term, variable: str = "n") -> ComplexityFunction:
        return cls(tuple(terms), variable)

    @classmethod
    def monomial(cls, coefficient: float, power: float) -> ComplexityFunction:
        return cls((Term(coefficient, power),))

    @property
    def leading(self) -> Term:
        return self.terms[0]

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) == 1 and self.terms[0].is_power

    def scaled(self, factor: float) -> ComplexityFunction:
        if factor == 1:
            return self
        return ComplexityFunction(tuple(t.scaled(factor) for t in self.terms), self.variable)

    def __call__(self, n):
        if np.ndim(n):
            return self.values(n)
        return evaluate(self, n)

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return sum((t.values(n) for t in self.terms), np.zeros(n.shape))

    def __str__(self) -> str:
        return render(self)


def evaluate(f: ComplexityFunction, n: float) -> float:
    """Value of ``f`` at ``n``; ``inf`` when it exceeds the double range."""
    return math.fsum(t.value(n) for t in f.terms)


def log10_evaluate(f: ComplexityFunction, n: float) -> float:
    """log10 of ``f(n)`` computed without leaving log space.

    A single-term function is reduced to ``log10(c) + p*log10(n) + ...``
    with no exponentiation at all, so huge magnitudes stay exact.
    """
    logs = [t.log10_value(n) for t in f.terms]
    top = max(logs)
    if len(logs) == 1 or top == -math.inf:
        return top
    return top + math.log10(math.fsum(10.0 ** (x - top) for x in logs))


# ---------------------------------------------------------------- rendering

def _num(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def render_term(t: Term, var: str = "n") -> str:
    parts = []
    if t.coefficient != 1 or t.is_constant:
        parts.append(_num(t.coefficient))
    if t.power:
        parts.append(var if t.power == 1 else f"{var}^{_num(t.power)}")
    if t.log_exponent:
        if t.log_base == math.e:
            parts.append(f"ln({var})" if t.log_exponent == 1 else f"ln({var})^{_num(t.log_exponent)}")
        else:
            parts.append(f"log[{_num(t.log_base)}]^{_num(t.log_exponent)}({var})")
    if t.exp_base != 1:
        parts.append(f"{_num(t.exp_base)}^{var}")
    if t.gamma_exponent:
        arg = f"{var}+1" if t.gamma_shift else var
        g = f"gamma({arg})"
        parts.append(g if t.gamma_exponent == 1 else f"{g}^{_num(t.gamma_exponent)}")
    return " * ".join(parts)


def render(f: ComplexityFunction) -> str:
    """Text form accepted back by :func:`parse`."""
    return " + ".join(render_term(t, f.variable) for t in f.terms)


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()\[\]!])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variable: str):
        self.text = text
        self.var = variable
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset: int = 0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            raise ExpressionError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def number(self) -> float:
        kind, text, pos = self.take()
        if kind != "num":
            raise ExpressionError(f"expected a number, found {text or 'end of input'!r}", pos)
        return float(text)

    def is_var(self, tok) -> bool:
        return tok[0] == "name" and tok[1] == self.var

    def expression(self) -> ComplexityFunction:
        terms = [self.term()]
        while self.peek()[1] == "+":
            self.take()
            terms.append(self.term())
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {text!r}", pos)
        return ComplexityFunction(tuple(terms), self.var)

    def term(self) -> Term:
        acc = dict(coefficient=1.0, power=0.0, log_exponent=0.0, log_base=None,
                   exp_base=1.0, gamma_exponent=0.0, gamma_shift=0)
        start = self.peek()[2]
        self.factor(acc)
        while self.peek()[1] == "*":
            self.take()
            self.factor(acc)
        if acc["coefficient"] <= 0:
            raise ExpressionError("coefficient must be positive", start)
        try:
            return Term(**acc)
        except ValueError as exc:
            raise ExpressionError(str(exc), start) from None

    def exponent(self) -> float:
        if self.peek()[1] == "^":
            self.take()
            return self.number()
        return 1.0

    def factor(self, acc: dict) -> None:
        kind, text, pos = self.peek()
        if kind == "num":
            value = self.number()
            if self.peek()[1] == "^":
                self.take()
                if self.is_var(self.peek()):
                    self.take()
                    acc["exp_base"] *= value
                else:
                    acc["coefficient"] *= value ** self.number()
            else:
                acc["coefficient"] *= value
        elif self.is_var((kind, text, pos)):
            self.take()
            if self.peek()[1] == "!":
                self.take()
                self._gamma(acc, 1.0, 1, pos)
            else:
                acc["power"] += self.exponent()
        elif kind == "name" and text in ("log", "ln"):
            self.take()
            base = math.e if text == "ln" else 2.0
            if text == "log" and self.peek()[1] == "[":
                self.take()
                base = self.number()
                self.expect("]")
            exp = self.exponent()
            self.expect("(")
            self._expect_var()
            self.expect(")")
            exp *= self.exponent()
            if acc["log_exponent"] and acc["log_base"] != base:
                raise ExpressionError("log factors with different bases in one term", pos)
            acc["log_base"] = base
            acc["log_exponent"] += exp
        elif kind == "name" and text == "gamma":
            self.take()
            self.expect("(")
            self._expect_var()
            shift = 0
            if self.peek()[1] == "+":
                self.take()
                k, t, p = self.take()
                if t not in ("1", "1.0"):
                    raise ExpressionError("only gamma(n) and gamma(n+1) are supported", p)
                shift = 1
            self.expect(")")
            self._gamma(acc, self.exponent(), shift, pos)
        else:
            raise ExpressionError(f"unexpected {text or 'end of input'!r}", pos)

    def _expect_var(self):
        kind, text, pos = self.take()
        if text != self.var:
            raise ExpressionError(f"expected variable {self.var!r}, found {text or 'end of input'!r}", pos)

    def _gamma(self, acc: dict, exponent: float, shift: int, pos: int) -> None:
        if acc["gamma_exponent"] and acc["gamma_shift"] != shift:
            raise ExpressionError("gamma(n) and gamma(n+1) cannot share a term", pos)
        acc["gamma_exponent"] += exponent
        acc["gamma_shift"] = shift


def parse(text: str, variable: str = "n") -> ComplexityFunction:
    """Parse e.g. ``"5.23e-9 * n^3"`` or ``"408 * n^2 * gamma(n+1)"``.

    ``log(n)`` defaults to base 2, ``ln(n)`` is base e and ``n!`` is sugar
    for ``gamma(n+1)``.
    """
    if not text or not text.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(text, variable).expression()


def from_terms(terms: Iterable[Term], variable: str = "n") -> ComplexityFunction:
    return ComplexityFunction(tuple(terms), variable)
