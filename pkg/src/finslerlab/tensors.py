"""Pointwise curvature stack of a Finsler metric, from a single jet lift.

One lift of the length function per (metric, point) feeds everything:
fundamental tensor, Cartan torsion, spray, Berwald connection, Berwald /
Landsberg / Riemann curvatures.  Quantities are held both as jets (so the
covariant-derivative layer can take further x/y derivatives) and as plain
value arrays.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .jets import Jet, lift
from .metrics import AdmissibilityError, MetricSpec, PointState

DEFAULT_ORDER_X = 2
DEFAULT_ORDER_Y = 6


class DegenerateFlagError(ValueError):
    """Transverse edge is parallel to the flagpole."""


class PositivityError(AdmissibilityError):
    """Fundamental tensor failed its Cholesky check."""


def _obj_array(shape):
    return np.empty(shape, dtype=object)


def jet_matrix_inverse(m):
    """Inverse of a small jet-valued matrix via adjugate over determinant."""
    n = len(m)
    det = _jet_det(m)
    inv_det = det.reciprocal() if isinstance(det, Jet) else 1.0 / det
    out = _obj_array((n, n))
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != i]
                     for r in range(n) if r != j]
            cof = _jet_det(minor) if n > 1 else 1.0
            sign = -1.0 if (i + j) % 2 else 1.0
            out[i, j] = cof * inv_det * sign
    return out


def _jet_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    acc = None
    for j in range(n):
        minor = [[row[c] for c in range(n) if c != j] for row in m[1:]]
        term = m[0][j] * _jet_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


class GeometryPack:
    """All curvature data of one metric at one point, computed lazily.

    order_x=2, order_y=6 covers the deepest consumer (the horizontal
    derivative of the Landsberg tensor); pass smaller orders when only
    shallow quantities are needed.
    """

    def __init__(self, metric: MetricSpec, state: PointState,
                 order_x: int = DEFAULT_ORDER_X,
                 order_y: int = DEFAULT_ORDER_Y):
        self.metric = metric
        self.state = state
        self.n = metric.dim
        self.order_x = order_x
        self.order_y = order_y

    # -- jets ---------------------------------------------------------------

    @cached_property
    def F_jet(self) -> Jet:
        return lift(self.metric.field, self.state, self.order_x, self.order_y)

    @cached_property
    def F2_jet(self) -> Jet:
        return self.F_jet * self.F_jet

    @cached_property
    def y_jets(self):
        space = self.F_jet.space
        return [Jet.variable(space, "y", i, self.state.y[i])
                for i in range(self.n)]

    @cached_property
    def g_jets(self):
        n = self.n
        out = _obj_array((n, n))
        dys = [self.F2_jet.dy(i) for i in range(n)]
        for i in range(n):
            for j in range(i, n):
                out[i, j] = out[j, i] = dys[i].dy(j) * 0.5
        return out

    @cached_property
    def g_inv_jets(self):
        return jet_matrix_inverse([[self.g_jets[i, j] for j in range(self.n)]
                                   for i in range(self.n)])

    @cached_property
    def spray_jets(self):
        """G^i = 1/4 g^{im} { (F^2)_{x^k y^m} y^k - (F^2)_{x^m} }."""
        n = self.n
        f2 = self.F2_jet
        dxs = [f2.dx(k) for k in range(n)]
        rhs = []
        for m in range(n):
            acc = None
            for k in range(n):
                term = self.y_jets[k] * dxs[k].dy(m)
                acc = term if acc is None else acc + term
            rhs.append(acc - dxs[m])
        out = []
        for i in range(n):
            acc = None
            for m in range(n):
                term = self.g_inv_jets[i, m] * rhs[m]
                acc = term if acc is None else acc + term
            out.append(acc * 0.25)
        return out

    @cached_property
    def landsberg_jets(self):
        """L_{jkl} = -1/2 y_i B^i_{jkl} with y_i = g_{ij} y^j, as jets."""
        n = self.n
        y_low = []
        for i in range(n):
            acc = None
            for j in range(n):
                term = self.g_jets[i, j] * self.y_jets[j]
                acc = term if acc is None else acc + term
            y_low.append(acc)
        out = _obj_array((n, n, n))
        for j in range(n):
            for k in range(j, n):
                djk = [self.spray_jets[i].dy(j).dy(k) for i in range(n)]
                for l in range(k, n):
                    acc = None
                    for i in range(n):
                        term = y_low[i] * djk[i].dy(l)
                        acc = term if acc is None else acc + term
                    val = acc * (-0.5)
                    for p in ((j, k, l), (j, l, k), (k, j, l),
                              (k, l, j), (l, j, k), (l, k, j)):
                        out[p] = val
        return out

    @cached_property
    def mean_landsberg_jets(self):
        """J_k = g^{ij} L_{ijk}, as jets."""
        n = self.n
        out = []
        for k in range(n):
            acc = None
            for i in range(n):
                for j in range(n):
                    term = self.g_inv_jets[i, j] * self.landsberg_jets[i, j, k]
                    acc = term if acc is None else acc + term
            out.append(acc)
        return out

    @cached_property
    def riemann_jets(self):
        """R^i_k as jets, from the spray alone."""
        n = self.n
        G = self.spray_jets
        gdx = [[G[i].dx(j) for j in range(n)] for i in range(n)]
        gdy = [[G[i].dy(j) for j in range(n)] for i in range(n)]
        out = _obj_array((n, n))
        for i in range(n):
            for k in range(n):
                acc = gdx[i][k] * 2.0
                for j in range(n):
                    acc = acc - self.y_jets[j] * gdx[i][j].dy(k)
                    acc = acc + 2.0 * (G[j] * gdy[i][j].dy(k))
                    acc = acc - gdy[i][j] * gdy[j][k]
                out[i, k] = acc
        return out

    # -- values -------------------------------------------------------------

    @cached_property
    def F(self) -> float:
        return self.state.F

    @cached_property
    def g(self) -> np.ndarray:
        n = self.n
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = self.g_jets[i, j].value
        try:
            np.linalg.cholesky(out)
        except np.linalg.LinAlgError as exc:
            raise PositivityError(
                f"fundamental tensor of {self.metric.name} not positive-"
                f"definite at x={self.state.x}, y={self.state.y}") from exc
        return out

    @cached_property
    def g_inv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def y_lower(self) -> np.ndarray:
        return self.g @ self.state.y

    @cached_property
    def ell(self) -> np.ndarray:
        """Distinguished section y / F."""
        return self.state.y / self.F

    @cached_property
    def angular(self) -> np.ndarray:
        """h_ij = g_ij - F^-2 (g_ip y^p)(g_jq y^q)."""
        yl = self.y_lower
        return self.g - np.outer(yl, yl) / self.F ** 2

    @cached_property
    def cartan(self) -> np.ndarray:
        """C_ijk = 1/4 d^3 F^2 / dy^i dy^j dy^k."""
        n = self.n
        out = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    beta = [0] * n
                    beta[i] += 1
                    beta[j] += 1
                    beta[k] += 1
                    out[i, j, k] = 0.25 * self.F2_jet.deriv_value(beta=beta)
        return out

    @cached_property
    def mean_cartan(self) -> np.ndarray:
        return np.einsum("jk,ijk->i", self.g_inv, self.cartan)

    @cached_property
    def spray(self) -> np.ndarray:
        return np.array([j.value for j in self.spray_jets])

    @cached_property
    def nonlinear_connection(self) -> np.ndarray:
        """N^i_j = dG^i/dy^j."""
        n = self.n
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = self.spray_jets[i].deriv_value(beta=j)
        return out

    @cached_property
    def berwald_connection(self) -> np.ndarray:
        """Gamma^i_jk = d^2 G^i / dy^j dy^k."""
        n = self.n
        out = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    beta = [0] * n
                    beta[j] += 1
                    beta[k] += 1
                    out[i, j, k] = self.spray_jets[i].deriv_value(beta=beta)
        return out

    @cached_property
    def berwald(self) -> np.ndarray:
        """B^i_jkl = d^3 G^i / dy^j dy^k dy^l."""
        n = self.n
        out = np.empty((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        beta = [0] * n
                        beta[j] += 1
                        beta[k] += 1
                        beta[l] += 1
                        out[i, j, k, l] = self.spray_jets[i].deriv_value(beta=beta)
        return out

    @cached_property
    def mean_berwald(self) -> np.ndarray:
        """E_jk = 1/2 B^m_jkm."""
        return 0.5 * np.einsum("mjkm->jk", self.berwald)

    @cached_property
    def landsberg(self) -> np.ndarray:
        n = self.n
        out = np.empty((n, n, n))
        for idx in np.ndindex(n, n, n):
            out[idx] = self.landsberg_jets[idx].value
        return out

    @cached_property
    def mean_landsberg(self) -> np.ndarray:
        return np.array([j.value for j in self.mean_landsberg_jets])

    @cached_property
    def riemann(self) -> np.ndarray:
        """R^i_k values."""
        n = self.n
        out = np.empty((n, n))
        for i in range(n):
            for k in range(n):
                out[i, k] = self.riemann_jets[i, k].value
        return out

    @cached_property
    def riemann_dy(self) -> np.ndarray:
        """R^i_{k.l} = dR^i_k / dy^l."""
        n = self.n
        out = np.empty((n, n, n))
        for i in range(n):
            for k in range(n):
                for l in range(n):
                    out[i, k, l] = self.riemann_jets[i, k].deriv_value(beta=l)
        return out

    @cached_property
    def riemann_kl(self) -> np.ndarray:
        """R^i_{kl} = 1/3 (dR^i_k/dy^l - dR^i_l/dy^k)."""
        d = self.riemann_dy
        return (d - d.transpose(0, 2, 1)) / 3.0

    # -- derived scalars ----------------------------------------------------

    def flag_curvature(self, u) -> float:
        """Flag curvature of span{y, u} with flagpole y.

        u is orthogonalized against y w.r.t. g_y first (the result is
        invariant under u -> u + c y; this just improves conditioning).
        """
        u = np.asarray(u, dtype=float)
        g = self.g
        y = self.state.y
        gyy = float(y @ g @ y)
        guu = float(u @ g @ u)
        gyu = float(y @ g @ u)
        denom_raw = gyy * guu - gyu ** 2
        if denom_raw < 1e-10 * (y @ y) * (u @ u):
            raise DegenerateFlagError("transverse edge parallel to flagpole")
        u_perp = u - (gyu / gyy) * y
        ru = self.riemann @ u_perp
        num = float(u_perp @ g @ ru)
        den = gyy * float(u_perp @ g @ u_perp)
        return num / den

    def berwald_apply(self, u, v, w) -> np.ndarray:
        """Vector B_y(u, v, w)."""
        return np.einsum("ijkl,j,k,l->i", self.berwald, u, v, w)

    def isotropic_berwald_rhs(self, phi: float, u, v, w) -> np.ndarray:
        """Model Berwald curvature of an isotropic-Berwald metric.

        Phi F^-1 { h(u,v) pr(w) + h(v,w) pr(u) + h(w,u) pr(v)
                   + 2 F C(u,v,w) ell },  pr(w) = w - g(w, ell) ell.
        """
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        w = np.asarray(w, float)
        g = self.g
        ell = self.ell
        h = self.angular

        def pr(a):
            return a - float(a @ g @ ell) * ell

        huv = float(u @ h @ v)
        hvw = float(v @ h @ w)
        hwu = float(w @ h @ u)
        cuvw = float(np.einsum("ijk,i,j,k->", self.cartan, u, v, w))
        vec = (huv * pr(w) + hvw * pr(u) + hwu * pr(v)
               + 2.0 * self.F * cuvw * ell)
        return phi / self.F * vec


# ---------------------------------------------------------------------------
# functional wrappers (one-shot computations at a point)


def pack(metric: MetricSpec, at: PointState, **kw) -> GeometryPack:
    return GeometryPack(metric, at, **kw)


def fundamental_tensor(metric, at, **kw):
    return GeometryPack(metric, at, **kw).g


def cartan_torsion(metric, at, **kw):
    return GeometryPack(metric, at, **kw).cartan


def mean_cartan(metric, at, **kw):
    return GeometryPack(metric, at, **kw).mean_cartan


def spray(metric, at, **kw):
    return GeometryPack(metric, at, **kw).spray


def connection(metric, at, **kw):
    p = GeometryPack(metric, at, **kw)
    return p.nonlinear_connection, p.berwald_connection


def berwald_curvature(metric, at, **kw):
    return GeometryPack(metric, at, **kw).berwald


def mean_berwald(metric, at, **kw):
    return GeometryPack(metric, at, **kw).mean_berwald


def landsberg(metric, at, **kw):
    return GeometryPack(metric, at, **kw).landsberg


def mean_landsberg(metric, at, **kw):
    return GeometryPack(metric, at, **kw).mean_landsberg


def riemann_curvature(metric, at, **kw):
    return GeometryPack(metric, at, **kw).riemann


def riemann_kl(metric, at, **kw):
    return GeometryPack(metric, at, **kw).riemann_kl


def flag_curvature(metric, at, u, **kw):
    return GeometryPack(metric, at, **kw).flag_curvature(u)


def isotropic_berwald_rhs(metric, at, phi, u, v, w, **kw):
    return GeometryPack(metric, at, **kw).isotropic_berwald_rhs(phi, u, v, w)


# light-weight evaluations for ODE right-hand sides ------------------------


def spray_values(metric: MetricSpec, x, y) -> np.ndarray:
    """G^i(x, y) with a minimal-depth lift (for geodesic integration)."""
    st = metric.point(x, y)
    return GeometryPack(metric, st, order_x=1, order_y=2).spray


def connection_values(metric: MetricSpec, x, y):
    """(N^i_j, Gamma^i_jk) with a minimal-depth lift (for transport)."""
    st = metric.point(x, y)
    p = GeometryPack(metric, st, order_x=1, order_y=4)
    return p.nonlinear_connection, p.berwald_connection
