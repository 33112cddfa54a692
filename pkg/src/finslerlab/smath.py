"""Scalar-like math helpers usable on floats, NumPy arrays, and jets.

Metric evaluators are written against these so a single definition serves
plain evaluation, vectorized finite differencing, and jet lifting.
"""

import numpy as np

from .jets import Jet


def sqrt(v):
    if isinstance(v, Jet):
        return v.sqrt()
    return np.sqrt(v)


def dot(a, b):
    """Euclidean inner product of two coordinate sequences."""
    it = iter(range(len(a)))
    out = a[next(it)] * b[0]
    for i in it:
        out = out + a[i] * b[i]
    return out


def norm(a):
    return sqrt(dot(a, a))
