"""Pure-NumPy fallback for the compiled jet kernel.

Mirrors the interface of the Cython module `_jetcore`; selected at import time
by `_kernel` when the extension is unavailable (or forced via
FINSLERLAB_PURE_PYTHON=1).
"""

import numpy as np


def multiply(a, b, ti, tj, tk, size):
    """Truncated product of coefficient vectors a and b via a triple table."""
    return np.bincount(tk, weights=a[ti] * b[tj], minlength=size)


def fused_series(u, coef, ti, tj, tk, size):
    """Horner evaluation of sum_k coef[k] * u**k for a zero-constant-term u."""
    out = np.zeros(size)
    out[0] = coef[-1]
    for k in range(len(coef) - 2, -1, -1):
        out = np.bincount(tk, weights=out[ti] * u[tj], minlength=size)
        out[0] += coef[k]
    return out
