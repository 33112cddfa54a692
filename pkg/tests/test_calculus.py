"""Covariant derivatives and the curvature identity chain."""

import numpy as np
import pytest

from finslerlab import calculus, tensors
from finslerlab.calculus import (landsberg_flow_residual,
                                 length_horizontal_residual,
                                 mean_landsberg_rate,
                                 metric_compatibility_residuals, rel_residual,
                                 riemann_mean_cartan_residual,
                                 spray_directional, vertical_covariant)
from finslerlab.metrics import get_metric

from conftest import states


def packs(metric, count, seed=0):
    return [tensors.pack(metric, st) for st in states(metric, count, seed)]


class TestRelResidual:
    def test_relative_when_scale_nonzero(self):
        assert rel_residual(np.array([1e-8]), np.array([2.0])) == \
            pytest.approx(5e-9)

    def test_absolute_when_all_terms_vanish(self):
        assert rel_residual(np.array([1e-12]), np.array([0.0])) == \
            pytest.approx(1e-12)


class TestCovariantDerivatives:
    def test_vertical_derivative_of_g_is_2C(self, funk):
        for pk in packs(funk, 3):
            g_v = vertical_covariant(pk.g_jets, pk)
            assert rel_residual(g_v - 2.0 * pk.cartan, g_v) < 1e-12

    def test_horizontal_g_is_minus_2L(self, dim):
        for name in ("funk", "sphere", "quartic"):
            m = get_metric(name, dim)
            for pk in packs(m, 3):
                res_h, res_v = metric_compatibility_residuals(pk)
                assert res_h < 1e-10, name
                assert res_v < 1e-12, name

    def test_length_function_horizontally_parallel(self, dim):
        for name in ("funk", "sphere", "randers_flat"):
            m = get_metric(name, dim)
            for pk in packs(m, 3):
                assert length_horizontal_residual(pk) < 1e-10, name

    def test_scalar_spray_derivative_matches_directional(self, funk):
        # f = F^2: F^2_{|m} y^m = 0 along the spray
        pk = packs(funk, 1)[0]
        jets = np.array(pk.F2_jet, dtype=object).reshape(())
        val = spray_directional(jets, pk)
        assert abs(val) < 1e-10 * pk.F ** 2


class TestLandsbergChain:
    def test_funk_landsberg_rate_is_phi2_f2_cartan(self, funk):
        # J' = Phi^2 F^2 I with Phi = 1/2
        for pk in packs(funk, 5):
            rate = mean_landsberg_rate(pk)
            expect = 0.25 * pk.F ** 2 * pk.mean_cartan
            assert rel_residual(rate - expect, rate, expect) < 1e-9

    def test_berwald_landsberg_rate_vanishes(self, sphere):
        for pk in packs(sphere, 3):
            rate = mean_landsberg_rate(pk)
            assert np.max(np.abs(rate)) < 1e-10 * pk.F


class TestFlowIdentities:
    def test_landsberg_flow_identity_all_zoo(self, dim):
        from finslerlab.metrics import zoo
        for m in zoo(dim):
            for pk in packs(m, 4):
                assert landsberg_flow_residual(pk) < 1e-10, m.name

    def test_riemann_mean_cartan_berwald(self, dim):
        for name in ("euclidean", "quartic", "sphere", "randers_flat"):
            m = get_metric(name, dim)
            for pk in packs(m, 3):
                assert riemann_mean_cartan_residual(pk) < 1e-10, name

    def test_riemann_mean_cartan_funk(self, funk):
        # c^2 F^2 I + R(I) = 0 with c = 1/2
        for pk in packs(funk, 5):
            assert riemann_mean_cartan_residual(pk, phi=0.5) < 1e-9

    def test_funk_mean_cartan_flag_plane(self, funk):
        # the flag spanned by I and y carries K = -1/4
        for pk in packs(funk, 5):
            i_up = pk.g_inv @ pk.mean_cartan
            assert pk.flag_curvature(i_up) == pytest.approx(-0.25,
                                                            abs=1e-9)


class TestValenceHandling:
    def test_unsupported_valence_rejected(self, funk):
        pk = packs(funk, 1)[0]
        n = funk.dim
        jets = np.empty((n, n, n, n, n), dtype=object)
        jets[...] = pk.F_jet
        with pytest.raises(ValueError):
            calculus.horizontal_covariant(jets, pk)

    def test_non_jet_input_rejected(self, funk):
        pk = packs(funk, 1)[0]
        with pytest.raises(TypeError):
            calculus.horizontal_covariant(np.ones((2, 2)), pk)
