"""Check registry, suite runner, theorem witnesses, and renderers."""

import os
import subprocess
import sys

import jsonschema
import pytest

from finslerlab import verify
from finslerlab.metrics import get_metric
from finslerlab.verify import (REGISTRY, REPORT_SCHEMA, SUITES, THEOREMS,
                               Tolerances, run_suite, suite_document,
                               theorem_witness, to_csv, to_markdown)


class TestRegistry:
    def test_every_check_has_an_anchor(self):
        for chk in REGISTRY:
            assert chk.anchor.strip(), chk.check_id
            assert chk.check_id == chk.check_id.lower()

    def test_check_ids_unique(self):
        ids = [c.check_id for c in REGISTRY]
        assert len(ids) == len(set(ids))

    def test_algebraic_suite_excludes_heavy(self):
        heavy = {c.check_id for c in REGISTRY if c.heavy}
        assert not heavy & set(SUITES["algebraic"])
        assert heavy < set(SUITES["full"])


class TestRunSuite:
    def test_zoo_passes_algebraic_suite(self, dim):
        from finslerlab.metrics import zoo
        for m in zoo(dim):
            reports = run_suite(m, suite="algebraic", samples=6)
            bad = [r for r in reports if not r.passed]
            assert not bad, (m.name, bad)

    def test_funk_passes_full_suite(self):
        m = get_metric("funk", 2)
        reports = run_suite(m, samples=8)
        assert all(r.passed for r in reports)

    def test_deterministic(self):
        m = get_metric("funk", 2)
        a = run_suite(m, suite="algebraic", samples=5, seed=3)
        b = run_suite(m, suite="algebraic", samples=5, seed=3)
        assert a == b

    def test_seed_changes_residuals(self):
        m = get_metric("funk", 2)
        a = run_suite(m, suite="algebraic", samples=5, seed=0)
        b = run_suite(m, suite="algebraic", samples=5, seed=1)
        assert any(x.residual != y.residual for x, y in zip(a, b))

    def test_inapplicable_checks_reported_skipped(self):
        m = get_metric("sphere", 2)
        reports = run_suite(m, suite="algebraic", samples=4)
        by_id = {r.check_id: r for r in reports}
        assert by_id["funk-pde"].skipped
        assert by_id["funk-pde"].passed

    def test_unknown_suite_rejected(self):
        with pytest.raises(KeyError):
            run_suite(get_metric("euclidean", 2), suite="everything")

    def test_bad_sample_count_rejected(self):
        with pytest.raises(ValueError):
            run_suite(get_metric("euclidean", 2), samples=0)

    def test_tightened_tolerance_can_fail(self):
        m = get_metric("funk", 2)
        tols = Tolerances(algebraic=1e-18, x_derivative=1e-18,
                          sigma=1e-18, flow=1e-18)
        reports = run_suite(m, suite="algebraic", samples=4, tols=tols)
        assert any(not r.passed for r in reports)

    def test_threaded_matches_serial(self):
        m = get_metric("funk", 2)
        serial = run_suite(m, suite="algebraic", samples=5)
        os.environ["FINSLERLAB_THREADS"] = "4"
        try:
            threaded = run_suite(m, suite="algebraic", samples=5)
        finally:
            del os.environ["FINSLERLAB_THREADS"]
        assert serial == threaded


class TestSuiteDocument:
    def test_schema_validates(self):
        m = get_metric("quartic", 2)
        reports = run_suite(m, suite="algebraic", samples=4)
        doc = suite_document(m, reports, "algebraic", 4, 0)
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["passed"]

    def test_renderers(self):
        m = get_metric("sphere", 2)
        reports = run_suite(m, suite="algebraic", samples=4)
        doc = suite_document(m, reports, "algebraic", 4, 0)
        md = to_markdown(doc)
        assert "| check |" in md and "sphere" in md
        csv_text = to_csv(doc)
        assert csv_text.splitlines()[0].startswith("check_id,")
        assert len(csv_text.splitlines()) == len(reports) + 1


class TestTheoremWitness:
    def _reports(self, m):
        return run_suite(m, suite="algebraic", samples=6)

    def test_riemannian_branch(self):
        m = get_metric("sphere", 2)
        w = theorem_witness(m, "berwald-rigidity", self._reports(m))
        assert w["consistent"]
        assert w["berwald_max"] < 1e-8
        assert w["mean_cartan_max"] < 1e-9

    def test_locally_minkowskian_branch(self):
        m = get_metric("quartic", 2)
        w = theorem_witness(m, "berwald-rigidity", self._reports(m))
        assert w["consistent"]
        assert w["riemann_max_rel"] < 1e-10
        assert w["mean_cartan_max"] > 1e-3   # non-Riemannian witness

    def test_isotropic_rigidity_funk(self):
        m = get_metric("funk", 2)
        w = theorem_witness(m, "isotropic-rigidity", self._reports(m))
        assert w["consistent"]
        assert w["phi"] == 0.5

    def test_tau_growth_funk(self):
        m = get_metric("funk", 2)
        w = theorem_witness(m, "tau-growth", self._reports(m))
        assert w["consistent"]
        assert w["tau_growth"] >= 2.9

    def test_tau_bounded_quartic(self):
        m = get_metric("quartic", 2)
        w = theorem_witness(m, "tau-growth", self._reports(m))
        assert w["consistent"]
        assert abs(w["tau_growth"]) < 1e-6

    def test_unknown_theorem_rejected(self):
        m = get_metric("funk", 2)
        with pytest.raises(KeyError):
            theorem_witness(m, "no-such-statement", [])

    def test_theorem_ids_exported(self):
        assert set(THEOREMS) == {"berwald-rigidity", "isotropic-rigidity",
                                 "tau-growth"}
