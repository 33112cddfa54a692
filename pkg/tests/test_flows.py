"""Geodesics, parallel transport, and the distortion flow law."""

import math

import numpy as np
import pytest

from finslerlab.flows import (BOUNDARY_MARGIN, geodesic, parallel_transport,
                              tau_flow_check)
from finslerlab.metrics import AdmissibilityError, get_metric

from conftest import states


class TestGeodesic:
    def test_euclidean_straight_line(self):
        m = get_metric("euclidean", 2)
        x0 = np.array([0.1, -0.2])
        y0 = np.array([0.6, 0.8])
        path = geodesic(m, x0, y0, 3.0)
        for t in (0.5, 1.7, 3.0):
            x, v = path.state(t)
            np.testing.assert_allclose(x, x0 + t * y0, atol=1e-10)
            np.testing.assert_allclose(v, y0, atol=1e-10)

    def test_speed_conserved(self, dim):
        for name in ("funk", "sphere", "quartic"):
            m = get_metric(name, dim)
            st = states(m, 1, seed=8)[0]
            y0 = st.y / st.F
            path = geodesic(m, np.zeros(dim), y0, 1.0, tol=1e-10)
            assert path.speed_drift < 1e-8, name

    def test_funk_radial_geodesic_closed_form(self):
        # from the origin with unit speed: x(t) = (1 - e^{-t}) e
        m = get_metric("funk", 2)
        path = geodesic(m, np.zeros(2), np.array([1.0, 0.0]), 2.0,
                        tol=1e-11)
        x, _ = path.state(2.0)
        assert x[0] == pytest.approx(1.0 - math.exp(-2.0), abs=1e-8)
        assert abs(x[1]) < 1e-12

    def test_chart_exit_flagged(self):
        # ride toward the Funk boundary long enough to trip the event
        m = get_metric("funk", 2)
        path = geodesic(m, np.zeros(2), np.array([1.0, 0.0]), 50.0)
        assert path.chart_exit
        x_end, _ = path.state(path.t_end)
        assert np.linalg.norm(x_end) <= 1.0 - BOUNDARY_MARGIN * 0.5

    def test_inadmissible_start_rejected(self):
        m = get_metric("funk", 2)
        with pytest.raises(AdmissibilityError):
            geodesic(m, np.array([1.5, 0.0]), np.array([1.0, 0.0]), 1.0)


class TestParallelTransport:
    def test_nonlinear_preserves_norm(self, dim):
        m = get_metric("funk", dim)
        st = states(m, 1, seed=3)[0]
        path = geodesic(m, np.zeros(dim), st.y / st.F, 1.0, tol=1e-10)
        u0 = np.ones(dim) / math.sqrt(dim)
        res = parallel_transport(m, path, u0, mode="nonlinear")
        assert res.norm_drift < 1e-7

    def test_linear_transport_is_linear_on_berwald(self):
        m = get_metric("sphere", 2)
        st = states(m, 1, seed=5)[0]
        path = geodesic(m, st.x, st.y / st.F, 1.0, tol=1e-11)
        u = np.array([1.0, 0.3])
        v = np.array([-0.4, 1.0])
        tu = parallel_transport(m, path, u, mode="linear").final
        tv = parallel_transport(m, path, v, mode="linear").final
        tw = parallel_transport(m, path, 2.0 * u + 0.5 * v,
                                mode="linear").final
        np.testing.assert_allclose(tw, 2.0 * tu + 0.5 * tv, atol=1e-8)

    def test_modes_agree_on_berwald(self):
        m = get_metric("sphere", 2)
        st = states(m, 1, seed=6)[0]
        path = geodesic(m, st.x, st.y / st.F, 1.0, tol=1e-11)
        # on a Berwald metric the two transport rules coincide along
        # directions where N(x, u) xd = Gamma(x, xd) u xd
        u0 = st.y / st.F
        lin = parallel_transport(m, path, u0, mode="linear").final
        non = parallel_transport(m, path, u0, mode="nonlinear").final
        np.testing.assert_allclose(lin, non, atol=1e-8)

    def test_zero_vector_rejected(self):
        m = get_metric("euclidean", 2)
        path = geodesic(m, np.zeros(2), np.array([1.0, 0.0]), 1.0)
        with pytest.raises(ValueError):
            parallel_transport(m, path, np.zeros(2))

    def test_unknown_mode_rejected(self):
        m = get_metric("euclidean", 2)
        path = geodesic(m, np.zeros(2), np.array([1.0, 0.0]), 1.0)
        with pytest.raises(ValueError):
            parallel_transport(m, path, np.array([1.0, 0.0]), mode="affine")


class TestTauFlow:
    def test_funk_flow_law(self):
        m = get_metric("funk", 2)
        fc = tau_flow_check(m, np.zeros(2), np.array([1.0, 0.0]), 2.0)
        assert fc.max_deviation < 5e-3
        assert fc.slope == pytest.approx(1.5, abs=5e-3)
        assert fc.tau[-1] - fc.tau[0] >= 2.9

    def test_quartic_tau_constant(self):
        m = get_metric("quartic", 2)
        fc = tau_flow_check(m, np.zeros(2), np.array([1.0, 0.4]), 2.0)
        assert np.max(np.abs(fc.tau - fc.tau[0])) < 1e-8
        assert np.max(np.abs(fc.s)) < 1e-8

    def test_riemannian_tau_identically_zero(self):
        m = get_metric("sphere", 2)
        fc = tau_flow_check(m, np.zeros(2), np.array([0.0, 1.0]), 1.0)
        assert np.max(np.abs(fc.tau)) < 1e-8
        assert fc.max_deviation < 1e-6
