"""Square matrix multiplication kernels.

The three classical kernels are compiled loops; the caller allocates the
output so every byte is visible to the allocation tracer in the harness.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DEFAULT_BLOCK_SIZE = 64
DEFAULT_CUTOFF = 64


def _check(a: np.ndarray, b: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.shape != a.shape:
        raise ValueError(f"order mismatch: {a.shape} vs {b.shape}")
    return a.shape[0]


@njit(cache=True)
def _naive(a, b, out):
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += a[i, k] * b[k, j]
            out[i, j] = s


@njit(cache=True)
def _reordered(a, b, out):
    n = a.shape[0]
    for i in range(n):
        for k in range(n):
            aik = a[i, k]
            for j in range(n):
                out[i, j] += aik * b[k, j]


@njit(cache=True)
def _blocked(a, b, out, bs):
    n = a.shape[0]
    for ii in range(0, n, bs):
        i_end = min(ii + bs, n)
        for kk in range(0, n, bs):
            k_end = min(kk + bs, n)
            for jj in range(0, n, bs):
                j_end = min(jj + bs, n)
                for i in range(ii, i_end):
                    for k in range(kk, k_end):
                        aik = a[i, k]
                        for j in range(jj, j_end):
                            out[i, j] += aik * b[k, j]


@njit(cache=True)
def _reordered_batch(a, b, out):
    for t in range(a.shape[0]):
        _reordered(a[t], b[t], out[t])


def multiply_naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """i-j-k triple loop."""
    n = _check(a, b)
    out = np.zeros((n, n))
    _naive(np.ascontiguousarray(a, dtype=float), np.ascontiguousarray(b, dtype=float), out)
    return out


def multiply_loop_reordered(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """i-k-j order: the inner loop walks rows of ``b`` and ``out`` contiguously."""
    n = _check(a, b)
    out = np.zeros((n, n))
    _reordered(np.ascontiguousarray(a, dtype=float), np.ascontiguousarray(b, dtype=float), out)
    return out


def multiply_blocked(a: np.ndarray, b: np.ndarray, block_size: int = DEFAULT_BLOCK_SIZE) -> np.ndarray:
    """Tiled i-k-j loops; tail tiles are clipped when ``block_size`` does not divide n."""
    n = _check(a, b)
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    out = np.zeros((n, n))
    _blocked(np.ascontiguousarray(a, dtype=float), np.ascontiguousarray(b, dtype=float),
             out, block_size)
    return out


def next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length()


def multiply_strassen(a: np.ndarray, b: np.ndarray, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Strassen's seven-product recursion with zero padding to a power of two.

    Each level expands every pending subproblem into its seven products at
    once (breadth-first), so the live operands at depth ``d`` number 7^d.
    Subproblems of order <= ``cutoff`` go to the loop-reordered kernel.
    """
    n = _check(a, b)
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    if n <= cutoff:
        return multiply_loop_reordered(a, b)
    m = next_power_of_two(n)
    pa = np.zeros((1, m, m))
    pb = np.zeros((1, m, m))
    pa[0, :n, :n] = a
    pb[0, :n, :n] = b
    return _strassen_batch(pa, pb, cutoff)[0, :n, :n].copy()


def _strassen_batch(A: np.ndarray, B: np.ndarray, cutoff: int) -> np.ndarray:
    t, m, _ = A.shape
    if m <= cutoff:
        out = np.zeros_like(A)
        _reordered_batch(A, B, out)
        return out
    h = m // 2
    A11, A12, A21, A22 = A[:, :h, :h], A[:, :h, h:], A[:, h:, :h], A[:, h:, h:]
    B11, B12, B21, B22 = B[:, :h, :h], B[:, :h, h:], B[:, h:, :h], B[:, h:, h:]

    L = np.empty((7 * t, h, h))
    R = np.empty((7 * t, h, h))
    s = [slice(q * t, (q + 1) * t) for q in range(7)]
    np.add(A11, A22, out=L[s[0]]); np.add(B11, B22, out=R[s[0]])
    np.add(A21, A22, out=L[s[1]]); R[s[1]] = B11
    L[s[2]] = A11;                 np.subtract(B12, B22, out=R[s[2]])
    L[s[3]] = A22;                 np.subtract(B21, B11, out=R[s[3]])
    np.add(A11, A12, out=L[s[4]]); R[s[4]] = B22
    np.subtract(A21, A11, out=L[s[5]]); np.add(B11, B12, out=R[s[5]])
    np.subtract(A12, A22, out=L[s[6]]); np.add(B21, B22, out=R[s[6]])

    M = _strassen_batch(L, R, cutoff)
    del L, R
    M1, M2, M3, M4, M5, M6, M7 = (M[sl] for sl in s)

    C = np.empty((t, m, m))
    C11, C12, C21, C22 = C[:, :h, :h], C[:, :h, h:], C[:, h:, :h], C[:, h:, h:]
    np.add(M1, M4, out=C11); C11 -= M5; C11 += M7
    np.add(M3, M5, out=C12)
    np.add(M2, M4, out=C21)
    np.subtract(M1, M2, out=C22); C22 += M3; C22 += M6
    return C
