"""Central finite differences with Richardson extrapolation.

This is the independent oracle used to cross-check every derivative the jet
engine produces.  It never touches jet arithmetic: estimates come from plain
field evaluations on tensor-product central stencils, extrapolated over two
Richardson levels (three step sizes h, h/2, h/4), giving an O(h^4) truncation
model and a defensible error estimate |T2 - T1(h/2)|.

Accuracy degrades beyond total derivative order 4; callers must stay within
that and leave enough domain margin for the stencil.
"""

from __future__ import annotations

import itertools
from typing import Callable, NamedTuple, Sequence

import numpy as np

# offsets and weights of the shortest central stencil for the m-th derivative
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}

# base step by total derivative order; grows with the order so the h^-m
# roundoff amplification stays under the truncation budget
_BASE_STEP = {1: 1e-4, 2: 2e-4, 3: 2e-3, 4: 6e-3}

_LEVELS = (1.0, 0.5, 0.25)


class FDEstimate(NamedTuple):
    value: float | np.ndarray
    error: float | np.ndarray


class InsufficientMarginError(ValueError):
    """The stencil would leave the declared domain of the field."""


def fd_derivative(f: Callable[[np.ndarray], np.ndarray],
                  z0,
                  multi: Sequence[int],
                  base_step: float | None = None) -> FDEstimate:
    """Mixed partial derivative of f at z0 for the given multi-index.

    f maps an array of points with shape (B, d) to values of shape (B,).
    z0 may be a single point (d,) or a batch (B, d); the result matches.
    """
    z0 = np.asarray(z0, dtype=float)
    single = z0.ndim == 1
    pts0 = np.atleast_2d(z0)               # (B, d)
    multi = tuple(int(m) for m in multi)
    order = sum(multi)
    if order == 0:
        val = np.asarray(f(pts0))
        return FDEstimate(float(val[0]) if single else val, 0.0)
    if order > 4:
        raise ValueError(f"finite differences unsupported beyond order 4 "
                         f"(requested {order})")
    if any(m > 4 for m in multi):
        raise ValueError("per-variable derivative order above 4")
    h0 = base_step if base_step is not None else _BASE_STEP[order]

    active = [v for v, m in enumerate(multi) if m > 0]
    grids = [_STENCILS[multi[v]][0] for v in active]
    wgts = [_STENCILS[multi[v]][1] for v in active]
    combos = list(itertools.product(*[range(len(g)) for g in grids]))

    steps = h0 * (1.0 + np.abs(pts0))      # (B, d), per-coordinate scaling

    all_pts = []
    for s in _LEVELS:
        for combo in combos:
            p = pts0.copy()
            for v, gi, grid in zip(active, combo, grids):
                p[:, v] += grid[gi] * steps[:, v] * s
            all_pts.append(p)
    vals = np.asarray(f(np.concatenate(all_pts, axis=0)))
    vals = vals.reshape(len(_LEVELS), len(combos), pts0.shape[0])

    estimates = []
    for li, s in enumerate(_LEVELS):
        denom = np.ones(pts0.shape[0])
        for v in active:
            denom *= (steps[:, v] * s) ** multi[v]
        acc = np.zeros(pts0.shape[0])
        for ci, combo in enumerate(combos):
            w = 1.0
            for gi, wg in zip(combo, wgts):
                w *= wg[gi]
            acc += w * vals[li, ci]
        estimates.append(acc / denom)
    a1, a2, a3 = estimates
    t1a = (4.0 * a2 - a1) / 3.0
    t1b = (4.0 * a3 - a2) / 3.0
    t2 = (16.0 * t1b - t1a) / 15.0
    err = np.abs(t2 - t1b)
    if single:
        return FDEstimate(float(t2[0]), float(err[0]))
    return FDEstimate(t2, err)


def fd_partial(fieldh, at, multi_index, base_step: float | None = None) -> FDEstimate:
    """Mixed (x, y) partial of a field at a point, via the central-FD oracle.

    multi_index is (alpha, beta): x-orders then y-orders, each length n.
    """
    x, y = (at.x, at.y) if hasattr(at, "x") else at
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    alpha, beta = multi_index
    multi = tuple(alpha) + tuple(beta)
    z0 = np.concatenate([x, y])
    _check_margin(fieldh, z0, multi, n, base_step)

    def f(pts):
        xs = [pts[:, i] for i in range(n)]
        ys = [pts[:, n + i] for i in range(n)]
        return fieldh(xs, ys)

    return fd_derivative(f, z0, multi, base_step=base_step)


def _check_margin(fieldh, z0, multi, n, base_step):
    order = sum(multi)
    if order == 0 or not hasattr(fieldh, "domain"):
        return
    h0 = base_step if base_step is not None else _BASE_STEP[order]
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        x = np.array([z0[i] + signs[i] * 2.0 * h0 * (1.0 + abs(z0[i]))
                      for i in range(n)])
        if not fieldh.domain(x):
            raise InsufficientMarginError(
                f"stencil around x={z0[:n]} leaves the field domain")
