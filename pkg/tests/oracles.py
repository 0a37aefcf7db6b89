"""Independent reference implementations used only by the tests."""

import numba as nb
import numpy as np


def naive_distance(a: str, b: str) -> int:
    """Memo-free recursion on the edit-distance definition.

    Matching equal leading symbols is always optimal, which keeps the
    branching manageable for lengths up to 8.
    """
    if not a:
        return len(b)
    if not b:
        return len(a)
    if a[0] == b[0]:
        return naive_distance(a[1:], b[1:])
    return 1 + min(
        naive_distance(a[1:], b),
        naive_distance(a, b[1:]),
        naive_distance(a[1:], b[1:]),
    )


@nb.njit(cache=True)
def dp_distance(a, la, b, lb):
    """Textbook full-matrix Wagner-Fischer table, kept separate from the package kernels."""
    D = np.zeros((la + 1, lb + 1), dtype=np.int64)
    for i in range(la + 1):
        D[i, 0] = i
    for j in range(lb + 1):
        D[0, j] = j
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            sub = D[i - 1, j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            D[i, j] = min(sub, D[i - 1, j] + 1, D[i, j - 1] + 1)
    return D[la, lb]


@nb.njit(cache=True)
def scan_within(s, n, table, r):
    """Codes (row indices) of ``table`` rows at oracle distance <= r from ``s``."""
    out = np.empty(table.shape[0], dtype=np.int64)
    k = 0
    for i in range(table.shape[0]):
        if dp_distance(s, n, table[i], table.shape[1]) <= r:
            out[k] = i
            k += 1
    return out[:k]


@nb.njit(cache=True)
def min_distance_to(table, words):
    """For every row of ``table`` the smallest oracle distance to any row of ``words``."""
    out = np.empty(table.shape[0], dtype=np.int64)
    for i in range(table.shape[0]):
        best = 1 << 30
        for j in range(words.shape[0]):
            d = dp_distance(table[i], table.shape[1], words[j], words.shape[1])
            if d < best:
                best = d
                if best == 0:
                    break
        out[i] = best
    return out


@nb.njit(cache=True)
def full_distance_matrix(words):
    N = words.shape[0]
    out = np.zeros((N, N), dtype=np.int64)
    for i in range(N):
        for j in range(i + 1, N):
            d = dp_distance(words[i], words.shape[1], words[j], words.shape[1])
            out[i, j] = d
            out[j, i] = d
    return out


def linear_knn(points: np.ndarray, v: np.ndarray, k: int):
    d = ((points - v) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(d.size), d))[:k]
    return order, d[order]


def central_difference(f, w: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        old = w[idx]
        w[idx] = old + eps
        hi = f()
        w[idx] = old - eps
        lo = f()
        w[idx] = old
        grad[idx] = (hi - lo) / (2 * eps)
    return grad
