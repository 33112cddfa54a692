"""Curvature stack: closed-form witnesses, invariants, oracle cross-checks."""

import numpy as np
import pytest

from finslerlab import metrics, oracle, tensors
from finslerlab.metrics import get_metric, sample_states
from finslerlab.tensors import (DegenerateFlagError, GeometryPack,
                                PositivityError, pack)

from conftest import states


def packs(metric, count, seed=0):
    return [pack(metric, st) for st in states(metric, count, seed)]


class TestFundamentalTensor:
    def test_euclidean_is_identity(self, euclidean):
        pk = packs(euclidean, 1)[0]
        np.testing.assert_allclose(pk.g, np.eye(euclidean.dim), atol=1e-12)

    def test_quartic_matches_fd_oracle(self):
        m = get_metric("quartic", 2)
        st = m.point([0.0, 0.0], [1.0, 1.0])
        pk = pack(m, st)
        fd = oracle.fd_metric_tensor(m, st.x, st.y)
        np.testing.assert_allclose(pk.g, fd, atol=1e-6)

    def test_symmetric_positive_definite(self, funk):
        for pk in packs(funk, 5):
            np.testing.assert_allclose(pk.g, pk.g.T, atol=1e-12)
            assert np.all(np.linalg.eigvalsh(pk.g) > 0)

    def test_inverse(self, funk):
        pk = packs(funk, 1)[0]
        np.testing.assert_allclose(pk.g @ pk.g_inv, np.eye(funk.dim),
                                   atol=1e-10)


class TestCartan:
    def test_riemannian_cartan_vanishes(self, sphere):
        for pk in packs(sphere, 5):
            assert np.max(np.abs(pk.cartan)) < 1e-12

    def test_quartic_cartan_nonzero(self, quartic):
        pk = packs(quartic, 1)[0]
        assert np.max(np.abs(pk.cartan)) > 1e-3

    def test_annihilates_flagpole(self, funk):
        for pk in packs(funk, 5):
            scale = np.max(np.abs(pk.cartan)) * np.linalg.norm(pk.state.y)
            assert np.max(np.abs(pk.cartan @ pk.state.y)) < 1e-10 * scale


class TestSpray:
    def test_x_independent_metrics_have_zero_spray(self, quartic, euclidean):
        for m in (quartic, euclidean):
            for pk in packs(m, 3):
                assert np.max(np.abs(pk.spray)) < 1e-12
                assert np.max(np.abs(pk.nonlinear_connection)) < 1e-12
                assert np.max(np.abs(pk.berwald_connection)) < 1e-12

    def test_funk_spray_is_half_theta_y(self, funk):
        for pk in packs(funk, 10):
            expect = 0.5 * pk.F * pk.state.y
            assert np.max(np.abs(pk.spray - expect)) < 1e-10 * pk.F

    def test_spray_quadratic_homogeneity(self, funk):
        st = states(funk, 1)[0]
        g1 = pack(funk, st).spray
        st2 = funk.point(st.x, 2.0 * st.y)
        g2 = pack(funk, st2).spray
        np.testing.assert_allclose(g2, 4.0 * g1, rtol=1e-9)

    def test_sphere_connection_matches_christoffel_oracle(self):
        for dim in (2, 3):
            m = get_metric("sphere", dim)
            st = states(m, 1, seed=4)[0]
            pk = pack(m, st)
            gam = oracle.christoffel(oracle.sphere_coefficients(dim), st.x)
            np.testing.assert_allclose(pk.berwald_connection, gam,
                                       atol=1e-6)


class TestBerwaldCurvature:
    def test_berwald_metrics_have_zero_berwald(self, dim):
        for name in ("euclidean", "quartic", "sphere", "randers_flat"):
            m = get_metric(name, dim)
            for pk in packs(m, 3):
                assert np.max(np.abs(pk.berwald)) < 1e-10, name

    def test_berwald_symmetry(self, funk):
        for pk in packs(funk, 5):
            b = pk.berwald
            np.testing.assert_allclose(b, b.transpose(0, 2, 3, 1),
                                       atol=1e-10)
            np.testing.assert_allclose(b, b.transpose(0, 3, 1, 2),
                                       atol=1e-10)

    def test_funk_isotropic_berwald_form(self, funk):
        rng = np.random.default_rng(2)
        for pk in packs(funk, 5):
            u, v, w = (rng.standard_normal(funk.dim) for _ in range(3))
            lhs = pk.berwald_apply(u, v, w)
            rhs = pk.isotropic_berwald_rhs(0.5, u, v, w)
            scale = np.max(np.abs(rhs)) + np.max(np.abs(lhs))
            assert np.max(np.abs(lhs - rhs)) < 1e-9 * scale


class TestRiemannCurvature:
    def test_flat_metrics(self, euclidean, quartic):
        for m in (euclidean, quartic):
            for pk in packs(m, 3):
                assert np.max(np.abs(pk.riemann)) < 1e-12

    def test_annihilates_flagpole(self, funk, sphere):
        for m in (funk, sphere):
            for pk in packs(m, 5):
                scale = pk.F ** 2 * np.linalg.norm(pk.state.y)
                assert np.max(np.abs(pk.riemann @ pk.state.y)) < 1e-8 * scale

    def test_reconstruction_from_kl(self, funk):
        for pk in packs(funk, 5):
            recon = pk.riemann_kl @ pk.state.y
            scale = np.max(np.abs(pk.riemann)) + pk.F ** 2
            assert np.max(np.abs(recon - pk.riemann)) < 1e-8 * scale

    def test_matches_fd_oracle(self, funk):
        st = states(funk, 1, seed=9)[0]
        pk = pack(funk, st)
        fd = oracle.fd_riemann(funk, st.x, st.y)
        scale = max(1.0, np.max(np.abs(pk.riemann)))
        assert np.max(np.abs(pk.riemann - fd)) < 1e-4 * scale


class TestFlagCurvature:
    def test_funk_constant(self, funk):
        rng = np.random.default_rng(0)
        for pk in packs(funk, 5):
            u = rng.standard_normal(funk.dim)
            assert pk.flag_curvature(u) == pytest.approx(-0.25, abs=1e-9)

    def test_sphere_constant_positive(self, sphere):
        rng = np.random.default_rng(1)
        for pk in packs(sphere, 5):
            u = rng.standard_normal(sphere.dim)
            assert pk.flag_curvature(u) == pytest.approx(1.0, abs=1e-9)

    def test_sphere_matches_classical_sectional(self):
        m = get_metric("sphere", 3)
        st = states(m, 1, seed=2)[0]
        pk = pack(m, st)
        u = np.array([0.3, -1.0, 0.4])
        k_classical = oracle.sectional_curvature(
            oracle.sphere_coefficients(3), st.x, st.y, u)
        assert pk.flag_curvature(u) == pytest.approx(k_classical, abs=1e-5)

    def test_scale_invariance_in_y(self, funk):
        st = states(funk, 1)[0]
        u = np.array([0.2, 1.0] + [0.0] * (funk.dim - 2))
        k1 = pack(funk, st).flag_curvature(u)
        for lam in (0.5, 2.0, 10.0):
            st2 = funk.point(st.x, lam * st.y)
            k2 = pack(funk, st2).flag_curvature(u)
            assert k2 == pytest.approx(k1, abs=1e-8)

    def test_degenerate_flag_rejected(self, funk):
        pk = packs(funk, 1)[0]
        with pytest.raises(DegenerateFlagError):
            pk.flag_curvature(2.0 * pk.state.y)


class TestMeanQuantities:
    def test_mean_cartan_trace_consistency(self, funk):
        for pk in packs(funk, 3):
            expect = np.einsum("jk,ijk->i", pk.g_inv, pk.cartan)
            np.testing.assert_allclose(pk.mean_cartan, expect, atol=1e-10)

    def test_mean_berwald_funk_form(self, funk):
        n = funk.dim
        for pk in packs(funk, 5):
            model = 0.5 * (n + 1) * 0.5 / pk.F * pk.angular
            scale = np.max(np.abs(model))
            assert np.max(np.abs(pk.mean_berwald - model)) < 1e-9 * scale

    def test_landsberg_trace_is_mean_landsberg(self, funk):
        for pk in packs(funk, 3):
            expect = np.einsum("ij,ijk->k", pk.g_inv, pk.landsberg)
            np.testing.assert_allclose(pk.mean_landsberg, expect,
                                       atol=1e-10)


class TestPositivityGuard:
    def test_indefinite_field_rejected(self):
        # a "norm" whose Hessian is indefinite along some directions
        from finslerlab.jets import FieldHandle
        from finslerlab.metrics import MetricSpec
        bad = MetricSpec(
            name="bad", dim=2,
            field=FieldHandle(
                lambda x, y: (y[0] ** 4 - 2.5 * y[0] ** 2 * y[1] ** 2
                              + y[1] ** 4) ** 0.25))
        st = bad.point([0.0, 0.0], [1.0, 0.45])
        with pytest.raises(PositivityError):
            GeometryPack(bad, st).g
