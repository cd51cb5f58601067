import numpy as np
import pytest

from rcomplexity.bench import (BenchPlan, Kernel, KernelCorrectnessError, make_inputs,
                               multiply_blocked, multiply_loop_reordered, multiply_naive,
                               multiply_strassen, relative_frobenius, run_bench)
from rcomplexity.bench import harness
from rcomplexity.expression import parse
from rcomplexity.fitting import MetricKind, fit_known

ALL = [multiply_naive, multiply_loop_reordered, multiply_blocked, multiply_strassen]
A2 = np.array([[1.0, 2.0], [3.0, 4.0]])
B2 = np.array([[5.0, 6.0], [7.0, 8.0]])


@pytest.mark.parametrize("mul", ALL, ids=lambda f: f.__name__)
def test_kernel_examples(mul):
    a, _ = make_inputs(7, 1)
    assert np.array_equal(mul(np.eye(7), a), a)
    assert np.array_equal(mul(A2, B2), [[19, 22], [43, 50]])
    assert np.array_equal(mul(np.zeros((7, 7)), a), np.zeros((7, 7)))
    assert mul(np.array([[3.0]]), np.array([[-2.5]]))[0, 0] == -7.5


@pytest.mark.parametrize("mul", ALL, ids=lambda f: f.__name__)
def test_order_mismatch(mul):
    with pytest.raises(ValueError):
        mul(np.eye(3), np.eye(4))
    with pytest.raises(ValueError):
        mul(np.ones((2, 3)), np.ones((3, 2)))


def test_naive_matches_numpy():
    a, b = make_inputs(50, 3)
    assert relative_frobenius(multiply_naive(a, b), a @ b) <= 1e-12


def test_reordered_64():
    a, b = make_inputs(64, 0)
    assert relative_frobenius(multiply_loop_reordered(a, b), multiply_naive(a, b)) <= 1e-10


def test_blocked_tiling_cases():
    a, b = make_inputs(100, 0)
    ref = multiply_naive(a, b)
    assert np.array_equal(multiply_blocked(a, b, 128), ref)
    assert relative_frobenius(multiply_blocked(a, b, 32), ref) <= 1e-10
    assert relative_frobenius(multiply_blocked(a, b, 1), ref) <= 1e-10
    with pytest.raises(ValueError):
        multiply_blocked(a, b, 0)


def test_strassen_cases():
    a, b = make_inputs(48, 0)
    assert np.array_equal(multiply_strassen(a, b, 64), multiply_loop_reordered(a, b))
    for n in (128, 96):
        a, b = make_inputs(n, 0)
        assert relative_frobenius(multiply_strassen(a, b, 16), multiply_naive(a, b)) <= 1e-6
    with pytest.raises(ValueError):
        multiply_strassen(a, b, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 33, 64])
def test_all_kernels_agree(n):
    a, b = make_inputs(n, 42)
    ref = multiply_naive(a, b)
    assert relative_frobenius(multiply_loop_reordered(a, b), ref) <= 1e-10
    assert relative_frobenius(multiply_blocked(a, b, 4), ref) <= 1e-10
    assert relative_frobenius(multiply_strassen(a, b, 2), ref) <= 1e-6


def test_inputs_are_seeded():
    a1, b1 = make_inputs(20, 5)
    a2, b2 = make_inputs(20, 5)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)
    assert not np.array_equal(a1, make_inputs(20, 6)[0])
    assert a1.min() >= -1 and a1.max() <= 1


# ---------------------------------------------------------------- harness

def test_plan_validation():
    with pytest.raises(ValueError):
        BenchPlan(Kernel.NAIVE, ())
    with pytest.raises(ValueError):
        BenchPlan(Kernel.NAIVE, (0,))
    with pytest.raises(ValueError):
        BenchPlan(Kernel.NAIVE, (4,), repetitions=0)
    with pytest.raises(ValueError):
        BenchPlan(Kernel.NAIVE, (4,), warmups=-1)


def test_kernel_names():
    assert Kernel.parse("loop-reordered") is Kernel.LOOP_REORDERED
    assert Kernel.parse("cache-friendly") is Kernel.LOOP_REORDERED
    assert Kernel.parse("Strassen") is Kernel.STRASSEN
    with pytest.raises(ValueError):
        Kernel.parse("winograd")


def test_run_bench_naive_growth():
    res = run_bench(BenchPlan(Kernel.NAIVE, (64, 128, 256), repetitions=3, warmups=1))
    assert [r.n for r in res.records] == [64, 128, 256]
    elapsed = [r.elapsed for r in res.records]
    assert elapsed[0] < elapsed[1] < elapsed[2]
    for r in res.records:
        assert r.peak_alloc_bytes >= 2 * r.n ** 2 * 8
        assert r.repetitions == 3 and r.timestamp


def test_single_timed_call():
    res = run_bench(BenchPlan(Kernel.BLOCKED, (16, 32), repetitions=1, warmups=0))
    assert res.timed_calls == 2


def test_measurement_sets():
    res = run_bench(BenchPlan(Kernel.LOOP_REORDERED, (8, 16, 32), repetitions=1, warmups=0))
    time_set = res.measurements(MetricKind.TIME_SECONDS)
    mem_set = res.measurements(MetricKind.PEAK_MEMORY_BYTES)
    assert [n for n, _ in time_set.samples] == [8, 16, 32]
    assert mem_set.metric is MetricKind.PEAK_MEMORY_BYTES
    assert all(v > 0 for _, v in time_set.samples)


@pytest.mark.parametrize("kernel", list(Kernel))
def test_timing_sanity(kernel):
    res = run_bench(BenchPlan(kernel, (64, 256), repetitions=3, warmups=1))
    assert res.records[1].elapsed > res.records[0].elapsed


def test_spot_check_failure(monkeypatch):
    monkeypatch.setattr(harness, "kernel_function", lambda plan: lambda a, b: a + b)
    with pytest.raises(KernelCorrectnessError):
        run_bench(BenchPlan(Kernel.BLOCKED, (8,), repetitions=1, warmups=0))


def _memory_exponent(kernel, sizes):
    res = run_bench(BenchPlan(kernel, sizes, repetitions=1, warmups=0))
    peaks = [r.peak_alloc_bytes for r in res.records]
    mem = res.measurements(MetricKind.PEAK_MEMORY_BYTES)
    slope = np.polyfit(np.log(sizes), np.log(peaks), 1)[0]
    return slope, peaks, mem


@pytest.mark.parametrize("kernel", [Kernel.BLOCKED, Kernel.LOOP_REORDERED])
def test_classical_memory_is_quadratic(kernel):
    slope, peaks, mem = _memory_exponent(kernel, (64, 128, 256))
    assert 1.8 <= slope <= 2.2
    fit = fit_known(mem, parse("n^2"))
    assert fit.r_squared > 0.99


def test_strassen_memory_step():
    slope, peaks, _ = _memory_exponent(Kernel.STRASSEN, (128, 256, 512))
    assert 2.4 <= slope <= 3.0
    for lo, hi in zip(peaks, peaks[1:]):
        assert 5.5 <= hi / lo <= 8.5
