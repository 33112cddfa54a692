"""Independent finite-difference oracles for the tensor stack.

Everything here is derived from plain evaluations of the length function (or,
for the classical Riemannian oracle, of the coefficient matrix) with central
differences; the jet engine is never consulted.  Used by the verification
suites and by `tensors --oracle` dumps to cross-check the production path.

The nested flag-curvature oracle differentiates the FD-computed spray, so its
steps are larger than the inner ones to stay above the propagated noise.
"""

from __future__ import annotations

import itertools

import numpy as np

from .findiff import fd_derivative
from .metrics import MetricSpec

# steps for the nested flag-curvature chain: the spray itself is computed with
# a larger inner step than the default ladder (its own noise floor drops to
# ~1e-10), and the outer differentiation of that spray uses steps sized so the
# propagated inner noise stays below the truncation budget
_INNER_STEP = 1e-2
_OUTER_STEP = {1: 5e-3, 2: 2e-2}


def _f2_batch(metric: MetricSpec, z):
    """F^2 over stacked (x, y) points, shape (B, 2n) -> (B,)."""
    n = metric.dim
    xs = [z[:, i] for i in range(n)]
    ys = [z[:, n + i] for i in range(n)]
    f = np.asarray(metric.field(xs, ys))
    return f * f


def _d_f2(metric, z, multi, base_step=None):
    """Batched mixed partial of F^2; multi indexes the 2n chart+fiber slots."""
    return fd_derivative(lambda p: _f2_batch(metric, p), z, multi,
                         base_step=base_step).value


def fd_metric_tensor(metric: MetricSpec, x, y) -> np.ndarray:
    """g_ij = 1/2 d^2 F^2/dy_i dy_j by central differences (batch-capable)."""
    x = np.asarray(x, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    y = np.atleast_2d(np.asarray(y, float))
    n = metric.dim
    z = np.concatenate([x, y], axis=1)
    g = np.empty((z.shape[0], n, n))
    for i in range(n):
        for j in range(i, n):
            multi = [0] * (2 * n)
            multi[n + i] += 1
            multi[n + j] += 1
            g[:, i, j] = g[:, j, i] = 0.5 * _d_f2(metric, z, multi)
    return g[0] if single else g


def fd_cartan(metric: MetricSpec, x, y) -> np.ndarray:
    """C_ijk = 1/4 d^3 F^2/dy^3 by central differences."""
    n = metric.dim
    z = np.concatenate([np.asarray(x, float), np.asarray(y, float)])[None, :]
    out = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                multi = [0] * (2 * n)
                multi[n + i] += 1
                multi[n + j] += 1
                multi[n + k] += 1
                v = 0.25 * _d_f2(metric, z, multi)[0]
                for p in set(itertools.permutations((i, j, k))):
                    out[p] = v
    return out


def fd_spray(metric: MetricSpec, x, y,
             base_step: float | None = None) -> np.ndarray:
    """G^i from FD derivatives of F^2; accepts batches (B, n) -> (B, n)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    n = metric.dim
    z = np.concatenate([x, y], axis=1)
    b = np.zeros((z.shape[0], n))
    for m in range(n):
        for k in range(n):
            multi = [0] * (2 * n)
            multi[k] += 1
            multi[n + m] += 1
            b[:, m] += y[:, k] * _d_f2(metric, z, multi, base_step)
        multi = [0] * (2 * n)
        multi[m] += 1
        b[:, m] -= _d_f2(metric, z, multi, base_step)
    g = np.empty((z.shape[0], n, n))
    for i in range(n):
        for j in range(i, n):
            multi = [0] * (2 * n)
            multi[n + i] += 1
            multi[n + j] += 1
            g[:, i, j] = g[:, j, i] = 0.5 * _d_f2(metric, z, multi, base_step)
    out = 0.25 * np.linalg.solve(g, b[..., None])[..., 0]
    return out[0] if single else out


def _fd_vector(f, z0, multi, h0):
    """Central FD of a vector-valued function at one point, two Richardson
    levels; f maps (B, d) -> (B, m)."""
    from .findiff import _STENCILS
    z0 = np.asarray(z0, float)
    active = [v for v, m in enumerate(multi) if m > 0]
    grids = [_STENCILS[multi[v]][0] for v in active]
    wgts = [_STENCILS[multi[v]][1] for v in active]
    combos = list(itertools.product(*[range(len(g)) for g in grids]))
    steps = h0 * (1.0 + np.abs(z0))
    pts = []
    for s in (1.0, 0.5, 0.25):
        for combo in combos:
            p = z0.copy()
            for v, gi, grid in zip(active, combo, grids):
                p[v] += grid[gi] * steps[v] * s
            pts.append(p)
    vals = f(np.asarray(pts))
    vals = vals.reshape(3, len(combos), -1)
    ests = []
    for li, s in enumerate((1.0, 0.5, 0.25)):
        denom = 1.0
        for v in active:
            denom *= (steps[v] * s) ** multi[v]
        acc = np.zeros(vals.shape[-1])
        for ci, combo in enumerate(combos):
            w = 1.0
            for gi, wg in zip(combo, wgts):
                w *= wg[gi]
            acc += w * vals[li, ci]
        ests.append(acc / denom)
    a1, a2, a3 = ests
    t1a = (4.0 * a2 - a1) / 3.0
    t1b = (4.0 * a3 - a2) / 3.0
    return (16.0 * t1b - t1a) / 15.0


def fd_riemann(metric: MetricSpec, x, y) -> np.ndarray:
    """R^i_k by differentiating the FD spray (fully jet-free)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = metric.dim
    z0 = np.concatenate([x, y])

    def gfun(z):
        return fd_spray(metric, z[:, :n], z[:, n:], base_step=_INNER_STEP)

    g0 = fd_spray(metric, x, y, base_step=_INNER_STEP)
    dgx = np.empty((n, n))       # dG^i/dx^k -> [i, k]
    dgy = np.empty((n, n))
    for k in range(n):
        multi = [0] * (2 * n)
        multi[k] = 1
        dgx[:, k] = _fd_vector(gfun, z0, multi, _OUTER_STEP[1])
        multi = [0] * (2 * n)
        multi[n + k] = 1
        dgy[:, k] = _fd_vector(gfun, z0, multi, _OUTER_STEP[1])
    dgxy = np.empty((n, n, n))   # d^2 G^i / dx^j dy^k -> [i, j, k]
    dgyy = np.empty((n, n, n))
    for j in range(n):
        for k in range(n):
            multi = [0] * (2 * n)
            multi[j] += 1
            multi[n + k] += 1
            dgxy[:, j, k] = _fd_vector(gfun, z0, multi, _OUTER_STEP[2])
    for j in range(n):
        for k in range(j, n):
            multi = [0] * (2 * n)
            multi[n + j] += 1
            multi[n + k] += 1
            v = _fd_vector(gfun, z0, multi, _OUTER_STEP[2])
            dgyy[:, j, k] = dgyy[:, k, j] = v
    r = 2.0 * dgx - np.einsum("j,ijk->ik", y, dgxy) \
        + 2.0 * np.einsum("j,ijk->ik", g0, dgyy) \
        - np.einsum("ij,jk->ik", dgy, dgy)
    return r


def fd_flag_curvature(metric: MetricSpec, x, y, u) -> float:
    """Flag curvature from the FD oracle chain (g and R both FD-computed)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    u = np.asarray(u, float)
    g = fd_metric_tensor(metric, x, y)
    r = fd_riemann(metric, x, y)
    gyy = float(y @ g @ y)
    gyu = float(y @ g @ u)
    u_perp = u - (gyu / gyy) * y
    num = float(u_perp @ g @ (r @ u_perp))
    den = gyy * float(u_perp @ g @ u_perp)
    return num / den


# ---------------------------------------------------------------------------
# classical Riemannian oracle (Christoffel symbols of a coefficient field)


def christoffel(a, x, step: float = 1e-4) -> np.ndarray:
    """Gamma^i_jk of a Riemannian coefficient field a(x) by central FD."""
    x = np.asarray(x, float)
    n = len(x)

    def a_at(pt):
        return np.array([[float(a(list(pt))[i][j]) for j in range(n)]
                         for i in range(n)])

    da = np.empty((n, n, n))     # d a_ij / dx_k -> [i, j, k]
    for k in range(n):
        e = np.zeros(n)
        e[k] = step
        da[:, :, k] = (a_at(x + e) - a_at(x - e)) / (2.0 * step)
    a0 = a_at(x)
    ainv = np.linalg.inv(a0)
    # low[l, j, k] = 1/2 (a_lj,k + a_lk,j - a_jk,l)
    low = 0.5 * (da + da.transpose(0, 2, 1) - da.transpose(2, 0, 1))
    return np.einsum("il,ljk->ijk", ainv, low)


def sectional_curvature(a, x, u, v, step: float = 1e-3) -> float:
    """Classical sectional curvature of span{u, v} for a Riemannian field a."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    n = len(x)

    def gamma_at(pt):
        return christoffel(a, pt, step=step / 10.0)

    dgamma = np.empty((n, n, n, n))   # d Gamma^i_jk / dx_m -> [i, j, k, m]
    for m in range(n):
        e = np.zeros(n)
        e[m] = step
        dgamma[:, :, :, m] = (gamma_at(x + e) - gamma_at(x - e)) / (2.0 * step)
    gam = gamma_at(x)
    # R^i_{jkl} = d_k Gamma^i_{jl} - d_l Gamma^i_{jk}
    #             + Gamma^i_{km} Gamma^m_{jl} - Gamma^i_{lm} Gamma^m_{jk}
    riem = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    riem[i, j, k, l] = (dgamma[i, j, l, k] - dgamma[i, j, k, l]
                                        + np.dot(gam[i, k, :], gam[:, j, l])
                                        - np.dot(gam[i, l, :], gam[:, j, k]))
    a0 = np.array([[float(a(list(x))[i][j]) for j in range(n)]
                   for i in range(n)])
    # <R(u, v) v, u>
    rv = np.einsum("ijkl,j,k,l->i", riem, v, u, v)
    num = float(rv @ a0 @ u)
    den = (float(u @ a0 @ u) * float(v @ a0 @ v) - float(u @ a0 @ v) ** 2)
    return num / den


def sphere_coefficients(dim: int):
    """Round-sphere chart coefficients a_ij = 4 delta_ij / (1 + |x|^2)^2."""
    def a(xs):
        s = None
        for v in xs:
            t = v * v
            s = t if s is None else s + t
        f = 4.0 / (1.0 + s) ** 2
        return [[f if i == j else 0.0 * f for j in range(dim)]
                for i in range(dim)]
    return a
