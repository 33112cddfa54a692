"""Covariant differentiation with the Berwald connection, and the residuals
of the curvature identity chain.

Horizontal derivatives use delta/delta x^m = d/dx^m - N^r_m d/dy^r plus one
Christoffel correction per tensor slot; vertical derivatives are plain y
partials.  Every identity residual is reported in max-norm relative to the
largest participating term, so the error budget is honest about derivative
depth.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet
from .tensors import GeometryPack

_TINY = 1e-300


def rel_residual(res: np.ndarray, *terms: np.ndarray) -> float:
    """Max-norm of res relative to the largest participating term."""
    scale = max((float(np.max(np.abs(t))) for t in terms), default=0.0)
    return float(np.max(np.abs(res))) / (scale + _TINY) if scale > 0 else \
        float(np.max(np.abs(res)))


def _jet_values(jets) -> np.ndarray:
    out = np.empty(jets.shape)
    for idx in np.ndindex(*jets.shape):
        out[idx] = jets[idx].value
    return out


def _partials(jets, slot: str) -> np.ndarray:
    """Stack of d/dx^m (slot 'x') or d/dy^m (slot 'y') values, last axis m."""
    shape = jets.shape
    n = jets.flat[0].space.n
    out = np.empty(shape + (n,))
    for idx in np.ndindex(*shape):
        j = jets[idx]
        for m in range(n):
            if slot == "x":
                out[idx + (m,)] = j.deriv_value(alpha=m)
            else:
                out[idx + (m,)] = j.deriv_value(beta=m)
    return out


def vertical_covariant(jets, pack: GeometryPack) -> np.ndarray:
    """T_{..., m}: vertical (fiber) derivative values, new last axis."""
    jets = np.asarray(jets, dtype=object)
    return _partials(jets, "y")


def horizontal_covariant(jets, pack: GeometryPack, n_upper: int = 0) -> np.ndarray:
    """T_{...|m}: Berwald-connection horizontal derivative values.

    `jets` is an object array of jet components; the first n_upper axes are
    contravariant slots, the rest covariant.  Supports valence up to (1, 3).
    """
    jets = np.asarray(jets, dtype=object)
    if isinstance(jets.flat[0], Jet) is False:
        raise TypeError("expected an array of jets")
    rank = jets.ndim
    if rank - n_upper > 3 or n_upper > 1:
        raise ValueError(f"unsupported valence ({n_upper}, {rank - n_upper})")
    nmat = pack.nonlinear_connection
    gamma = pack.berwald_connection
    dx = _partials(jets, "x")
    dy = _partials(jets, "y")
    out = dx - np.einsum("...r,rm->...m", dy, nmat)
    vals = _jet_values(jets)
    for axis in range(rank):
        moved = np.moveaxis(vals, axis, 0)      # contracted slot first
        if axis < n_upper:
            corr = np.einsum("irm,r...->i...m", gamma, moved)
        else:
            corr = -np.einsum("rim,r...->i...m", gamma, moved)
        out = out + np.moveaxis(corr, 0, axis)
    return out


def spray_directional(jets, pack: GeometryPack, n_upper: int = 0) -> np.ndarray:
    """T_{...|m} y^m: derivative along the geodesic spray."""
    cov = horizontal_covariant(jets, pack, n_upper=n_upper)
    return cov @ pack.state.y


def scalar_horizontal(jet: Jet, pack: GeometryPack) -> np.ndarray:
    """f_{|m} for a scalar jet."""
    return horizontal_covariant(np.array(jet, dtype=object).reshape(()), pack)


# ---------------------------------------------------------------------------
# identity residuals


def metric_compatibility_residuals(pack: GeometryPack) -> tuple[float, float]:
    """(max|g_ij|k + 2 L_ijk|, max|g_ij,k - 2 C_ijk|), relative."""
    g_h = horizontal_covariant(pack.g_jets, pack)
    g_v = vertical_covariant(pack.g_jets, pack)
    res_h = g_h + 2.0 * pack.landsberg
    res_v = g_v - 2.0 * pack.cartan
    return (rel_residual(res_h, g_h, pack.landsberg, pack.g),
            rel_residual(res_v, g_v, pack.cartan, pack.g))


def length_horizontal_residual(pack: GeometryPack) -> float:
    """max|F_{|m}| / F: the length function is horizontally parallel."""
    fm = scalar_horizontal(pack.F_jet, pack)
    return float(np.max(np.abs(fm))) / pack.F


def landsberg_flow_residual(pack: GeometryPack) -> float:
    """Residual of the Landsberg-rate identity

    L_{ijk|m} y^m + C_{ijm} R^m_k
      = -1/3 (g_im R^m_{k.j} + g_jm R^m_{k.i})
        - 1/6 (g_im R^m_{j.k} + g_jm R^m_{i.k}).
    """
    l_rate = spray_directional(pack.landsberg_jets, pack)
    cr = np.einsum("ijm,mk->ijk", pack.cartan, pack.riemann)
    g = pack.g
    rdy = pack.riemann_dy                       # R^m_{k.j} = rdy[m, k, j]
    rhs = -(np.einsum("im,mkj->ijk", g, rdy)
            + np.einsum("jm,mki->ijk", g, rdy)) / 3.0 \
          - (np.einsum("im,mjk->ijk", g, rdy)
             + np.einsum("jm,mik->ijk", g, rdy)) / 6.0
    res = l_rate + cr - rhs
    return rel_residual(res, l_rate, cr, rhs, pack.riemann_dy)


def mean_landsberg_rate(pack: GeometryPack) -> np.ndarray:
    """J_k' = J_{k|m} y^m."""
    return spray_directional(np.asarray(pack.mean_landsberg_jets,
                                        dtype=object), pack)


def mean_landsberg_flow_residual(pack: GeometryPack, s_model) -> float:
    """Residual of J_{k|m}y^m + I_m R^m_k = S_{.k|m}y^m - S_{|k}.

    `s_model` is the measures.SCurvatureJet for this pack (it carries the
    quadrature-differentiated volume-density data).
    """
    lhs = mean_landsberg_rate(pack) + pack.mean_cartan @ pack.riemann
    rhs = s_model.vertical_then_spray() - s_model.horizontal()
    # the Riemann term keeps the scale honest when both sides nearly vanish
    # (Riemannian metrics), so quadrature noise is not read as failure
    return rel_residual(lhs - rhs, lhs, rhs, pack.riemann)


def riemann_mean_cartan_residual(pack: GeometryPack,
                                 phi: float | None = None) -> float:
    """Berwald branch (phi None): |R(I)|; constant-isotropic branch:
    |c^2 F^2 I + R(I)|.  Relative to F^2 |I| (or |R| |I|) scale."""
    i_up = pack.g_inv @ pack.mean_cartan
    ri = pack.riemann @ i_up
    f2i = pack.F ** 2 * i_up
    if phi is None:
        return rel_residual(ri, f2i, pack.riemann)
    res = phi ** 2 * f2i + ri
    return rel_residual(res, f2i, ri)
