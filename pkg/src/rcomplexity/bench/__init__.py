from .harness import (BenchPlan, BenchResult, Kernel, KernelCorrectnessError, RunRecord,
                      make_inputs, relative_frobenius, run_bench)
from .kernels import (multiply_blocked, multiply_loop_reordered, multiply_naive,
                      multiply_strassen)

__all__ = [
    "BenchPlan", "BenchResult", "Kernel", "KernelCorrectnessError", "RunRecord",
    "make_inputs", "relative_frobenius", "run_bench", "multiply_blocked",
    "multiply_loop_reordered", "multiply_naive", "multiply_strassen",
]
