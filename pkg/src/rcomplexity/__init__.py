"""Constant-aware complexity classes, interval cost estimators and fitted performance models."""

__version__ = "0.1.0"

from .core import (ArchitectureProfile, BLClass, Flag, Kind, RClass, asymptotic_ratio_limit,
                   classify, convert, implies_bl, normalize)
from .estimators import (CrossoverResult, Interval, IntervalEstimate, Metric, Outcome,
                         PointWeights, SubintervalWeights, Verdict, compare, crossover, erm1,
                         erm2, extrapolate, rm1, rm2)
from .expression import ComplexityFunction, ExpressionError, Term, evaluate, parse, render
from .fitting import (FitError, FitResult, MeasurementSet, MetricKind, TermLibrary,
                      feature_transform, fit_known, fit_unknown, residual_report)

__all__ = [
    "ArchitectureProfile", "BLClass", "Flag", "Kind", "RClass", "asymptotic_ratio_limit",
    "classify", "convert", "implies_bl", "normalize",
    "CrossoverResult", "Interval", "IntervalEstimate", "Metric", "Outcome", "PointWeights",
    "SubintervalWeights", "Verdict", "compare", "crossover", "erm1", "erm2", "extrapolate",
    "rm1", "rm2",
    "ComplexityFunction", "ExpressionError", "Term", "evaluate", "parse", "render",
    "FitError", "FitResult", "MeasurementSet", "MetricKind", "TermLibrary",
    "feature_transform", "fit_known", "fit_unknown", "residual_report",
]
