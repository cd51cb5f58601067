"""Timed, memory-instrumented runs of the matrix kernels."""

from __future__ import annotations

import enum
import logging
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from ..core import ArchitectureProfile
from ..fitting import MeasurementSet, MetricKind
from . import kernels

log = logging.getLogger(__name__)

ELEMENT_SIZE = np.dtype(np.float64).itemsize
CHECK_MAX_N = 256
CLASSICAL_RTOL = 1e-10
STRASSEN_RTOL = 1e-6


class KernelCorrectnessError(RuntimeError):
    pass


class Kernel(enum.Enum):
    NAIVE = "naive"
    LOOP_REORDERED = "reordered"
    BLOCKED = "blocked"
    STRASSEN = "strassen"

    @classmethod
    def parse(cls, name: str) -> Kernel:
        aliases = {"loop-reordered": cls.LOOP_REORDERED, "cache-friendly": cls.LOOP_REORDERED}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class BenchPlan:
    kernel: Kernel
    sizes: tuple[int, ...]
    repetitions: int = 5
    warmups: int = 2
    block_size: int = kernels.DEFAULT_BLOCK_SIZE
    strassen_cutoff: int = kernels.DEFAULT_CUTOFF
    seed: int = 0

    def __post_init__(self):
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of positive integers")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.warmups < 0:
            raise ValueError("warmups must be >= 0")
        if self.block_size < 1:
            raise ValueError("block size must be >= 1")
        if self.strassen_cutoff < 2:
            raise ValueError("Strassen cutoff must be >= 2")


@dataclass(frozen=True)
class RunRecord:
    kernel: Kernel
    n: int
    elapsed: float
    peak_alloc_bytes: int
    repetitions: int
    timestamp: str


@dataclass
class BenchResult:
    plan: BenchPlan
    records: list[RunRecord] = field(default_factory=list)
    timed_calls: int = 0

    def measurements(self, metric: MetricKind,
                     architecture: ArchitectureProfile | None = None) -> MeasurementSet:
        if metric is MetricKind.TIME_SECONDS:
            samples = [(r.n, r.elapsed) for r in self.records]
        else:
            samples = [(r.n, float(r.peak_alloc_bytes)) for r in self.records]
        return MeasurementSet(tuple(samples), metric, self.plan.kernel.value, architecture)


def kernel_function(plan: BenchPlan) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if plan.kernel is Kernel.NAIVE:
        return kernels.multiply_naive
    if plan.kernel is Kernel.LOOP_REORDERED:
        return kernels.multiply_loop_reordered
    if plan.kernel is Kernel.BLOCKED:
        return lambda a, b: kernels.multiply_blocked(a, b, plan.block_size)
    return lambda a, b: kernels.multiply_strassen(a, b, plan.strassen_cutoff)


def make_inputs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform [-1, 1] operands from PCG64 seeded by ``(seed, n)``."""
    rng = np.random.Generator(np.random.PCG64([seed, n]))
    return rng.uniform(-1.0, 1.0, (n, n)), rng.uniform(-1.0, 1.0, (n, n))


def relative_frobenius(x: np.ndarray, ref: np.ndarray) -> float:
    denom = np.linalg.norm(ref)
    diff = np.linalg.norm(x - ref)
    return float(diff / denom) if denom else float(diff)


def spot_check(plan: BenchPlan, a: np.ndarray, b: np.ndarray, result: np.ndarray) -> None:
    if plan.kernel is Kernel.NAIVE:
        reference = a @ b
    else:
        reference = kernels.multiply_naive(a, b)
    tol = STRASSEN_RTOL if plan.kernel is Kernel.STRASSEN else CLASSICAL_RTOL
    err = relative_frobenius(result, reference)
    if not err <= tol:
        raise KernelCorrectnessError(
            f"{plan.kernel.value} kernel at n={a.shape[0]}: relative Frobenius error {err:.3e} > {tol:g}")


def peak_allocation(func, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """Run once under tracemalloc; returns the result and peak bytes including the operands."""
    was_tracing = tracemalloc.is_tracing()
    if not was_tracing:
        tracemalloc.start()
    tracemalloc.reset_peak()
    base = tracemalloc.get_traced_memory()[0]
    result = func(a, b)
    peak = tracemalloc.get_traced_memory()[1] - base
    if not was_tracing:
        tracemalloc.stop()
    return result, peak + a.nbytes + b.nbytes


def run_bench(plan: BenchPlan) -> BenchResult:
    """Benchmark ``plan.kernel`` at each size, serially.

    The timed calls never run under the allocation tracer; peak memory comes
    from one extra instrumented call per size.
    """
    func = kernel_function(plan)
    out = BenchResult(plan)
    for n in plan.sizes:
        a, b = make_inputs(n, plan.seed)
        for _ in range(plan.warmups):
            func(a, b)
        times = []
        for _ in range(plan.repetitions):
            t0 = time.perf_counter()
            func(a, b)
            times.append(time.perf_counter() - t0)
            out.timed_calls += 1
        result, peak = peak_allocation(func, a, b)
        if n <= CHECK_MAX_N:
            spot_check(plan, a, b, result)
        elapsed = max(statistics.median(times), time.get_clock_info("perf_counter").resolution)
        rec = RunRecord(plan.kernel, n, elapsed, peak, plan.repetitions,
                        datetime.now(timezone.utc).isoformat(timespec="seconds"))
        log.info("%s n=%d median=%.6gs peak=%d B", plan.kernel.value, n, elapsed, peak)
        out.records.append(rec)
    return out
