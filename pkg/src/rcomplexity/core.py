"""r-annotated complexity classes: ordering, classification, conversion."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .expression import ComplexityFunction, render

THETA_REL_TOL = 1e-12


class Kind(enum.Enum):
    BIG_THETA = "theta"
    BIG_O = "O"
    BIG_OMEGA = "omega"
    SMALL_O = "o"
    SMALL_OMEGA = "small-omega"

    @property
    def is_big(self) -> bool:
        return self in (Kind.BIG_THETA, Kind.BIG_O, Kind.BIG_OMEGA)


class Flag(enum.Enum):
    THETA = "Theta_r"
    O = "O_r"
    OMEGA = "Omega_r"
    SMALL_O = "o"
    SMALL_OMEGA = "omega"


@dataclass(frozen=True)
class ArchitectureProfile:
    frequency_hz: float
    label: str = ""

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValueError("frequency must be positive")


def _leading(f: ComplexityFunction) -> tuple[tuple, float]:
    top = f.leading.growth
    coeff = math.fsum(t.canonical_coefficient for t in f.terms if t.growth == top)
    return top, coeff


def asymptotic_ratio_limit(f: ComplexityFunction, g: ComplexityFunction) -> float:
    """``lim f(n)/g(n)`` as n grows: ``0.0``, ``math.inf`` or a positive ratio."""
    fg, fc = _leading(f)
    gg, gc = _leading(g)
    if fg == gg:
        return fc / gc
    return 0.0 if fg < gg else math.inf


def classify(f: ComplexityFunction, g: ComplexityFunction, r: float) -> frozenset[Flag]:
    if not r > 0:
        raise ValueError("r must be positive")
    limit = asymptotic_ratio_limit(f, g)
    flags = set()
    if limit == 0.0:
        flags.update({Flag.SMALL_O, Flag.O})
    elif limit == math.inf:
        flags.update({Flag.SMALL_OMEGA, Flag.OMEGA})
    else:
        # the same band on both sides keeps Theta == O and Omega
        if limit <= r * (1 + THETA_REL_TOL):
            flags.add(Flag.O)
        if limit >= r * (1 - THETA_REL_TOL):
            flags.add(Flag.OMEGA)
        if Flag.O in flags and Flag.OMEGA in flags:
            flags.add(Flag.THETA)
    return frozenset(flags)


@dataclass(frozen=True)
class RClass:
    """``kind_r(scale * g)``.

    The scale is kept as an exact fraction next to the unscaled base so that
    chains of conversions cancel without rounding.
    """

    kind: Kind
    r: float | None
    g: ComplexityFunction
    scale: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        if self.kind.is_big:
            if self.r is None or not self.r > 0:
                raise ValueError(f"{self.kind.name} needs a positive r")
        elif self.r is not None:
            raise ValueError("small-o / small-omega classes do not carry r")

    @property
    def base(self) -> ComplexityFunction:
        return self.g.scaled(float(self.scale))

    def __str__(self) -> str:
        sub = "" if self.r is None else f"_{self.r:g}"
        return f"{self.kind.name}{sub}({render(self.base)})"


@dataclass(frozen=True)
class BLClass:
    """A classical Bachmann-Landau statement (no r)."""

    kind: Kind
    base: ComplexityFunction

    def __str__(self) -> str:
        return f"{self.kind.name}({render(self.base)})"


def convert(cls: RClass, q: float) -> RClass:
    """Re-express a Big class at ``r = q``; the base is scaled by ``q / r``."""
    if not cls.kind.is_big:
        raise ValueError("only Big notations carry an r to convert")
    if not q > 0:
        raise ValueError("target q must be positive")
    if q == cls.r:
        return cls
    scale = cls.scale * Fraction(q) / Fraction(cls.r)
    return RClass(cls.kind, q, cls.g, scale)


def normalize(cls: RClass) -> RClass:
    return convert(cls, 1.0)


def implies_bl(cls: RClass) -> BLClass:
    if not cls.kind.is_big:
        raise ValueError("only Big notations have a B-L counterpart here")
    return BLClass(cls.kind, cls.base)
