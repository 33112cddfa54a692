"""CLI contract: exit codes, output formats, config round-trips."""

import io
import json

import jsonschema
import numpy as np
import pytest

from finslerlab import cli, verify
from finslerlab.cli import ConfigError, RunConfig, cmd_check, cmd_geodesic, \
    cmd_tensors, config_from_args, build_parser, main


def run_cmd(argv):
    """Invoke the dispatcher with stdout captured."""
    import contextlib
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


class TestCheckCommand:
    def test_passes_with_exit_zero_and_valid_json(self):
        code, out = run_cmd(["check", "--metric", "quartic",
                             "--suite", "algebraic", "--samples", "4"])
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, verify.REPORT_SCHEMA)
        assert doc["passed"]
        assert doc["config"]["metric"] == "quartic"

    def test_markdown_format(self):
        code, out = run_cmd(["check", "--metric", "sphere",
                             "--suite", "algebraic", "--samples", "4",
                             "--format", "markdown"])
        assert code == 0
        assert out.startswith("# finslerlab check report")
        assert "PASS" in out

    def test_csv_format(self):
        code, out = run_cmd(["check", "--metric", "euclidean",
                             "--suite", "algebraic", "--samples", "3",
                             "--format", "csv"])
        assert code == 0
        assert out.splitlines()[0].startswith("check_id,")

    def test_impossible_tolerance_fails_with_exit_one(self):
        code, out = run_cmd(["check", "--metric", "funk",
                             "--suite", "algebraic", "--samples", "4",
                             "--tol-algebraic", "1e-18",
                             "--tol-x-derivative", "1e-18"])
        assert code == 1
        assert not json.loads(out)["passed"]

    def test_unknown_metric_exits_two(self):
        code, _ = run_cmd(["check", "--metric", "hyperbolic-paraboloid"])
        assert code == 2

    def test_negative_tolerance_exits_two(self):
        code, _ = run_cmd(["check", "--metric", "funk",
                           "--tol-sigma", "-1.0"])
        assert code == 2

    def test_missing_subcommand_exits_two(self):
        assert main([]) == 2


class TestTensorsCommand:
    def test_funk_origin_metric_is_identity(self):
        code, out = run_cmd(["tensors", "--metric", "funk",
                             "--y", "1,0", "--select", "F,g,G"])
        assert code == 0
        doc = json.loads(out)
        np.testing.assert_allclose(doc["tensors"]["g"]["value"],
                                   np.eye(2), atol=1e-10)
        assert doc["tensors"]["F"]["value"] == pytest.approx(1.0)
        np.testing.assert_allclose(doc["tensors"]["G"]["value"],
                                   [0.5, 0.0], atol=1e-10)

    def test_flag_curvature_with_oracle(self):
        code, out = run_cmd(["tensors", "--metric", "sphere",
                             "--x", "0.2,0.1", "--y", "1,0.3",
                             "--u", "0,1", "--select", "K", "--oracle"])
        assert code == 0
        entry = json.loads(out)["tensors"]["K"]
        assert entry["value"] == pytest.approx(1.0, abs=1e-8)
        assert entry["oracle_delta"] < 1e-4

    def test_missing_y_exits_two(self):
        code, _ = run_cmd(["tensors", "--metric", "funk"])
        assert code == 2

    def test_k_without_u_exits_two(self):
        code, _ = run_cmd(["tensors", "--metric", "funk", "--y", "1,0",
                           "--select", "K"])
        assert code == 2

    def test_bad_vector_exits_two(self):
        code, _ = run_cmd(["tensors", "--metric", "funk", "--y", "1,0,0"])
        assert code == 2

    def test_inadmissible_point_exits_two(self):
        code, _ = run_cmd(["tensors", "--metric", "funk",
                           "--x", "2,0", "--y", "1,0"])
        assert code == 2

    def test_markdown_output(self):
        code, out = run_cmd(["tensors", "--metric", "euclidean",
                             "--y", "1,0", "--select", "g",
                             "--format", "markdown"])
        assert code == 0
        assert "## g" in out


class TestGeodesicCommand:
    def test_funk_csv_columns_and_summary(self):
        code, out = run_cmd(["geodesic", "--metric", "funk",
                             "--y", "1,0", "--t-end", "2"])
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,x1,x2,v1,v2,F,tau,S,S_integral"
        assert lines[-1].startswith("# max_deviation=")
        assert "slope=1.500" in lines[-1]
        last_row = lines[-2].split(",")
        # endpoint of the unit-speed Funk ray: 1 - e^{-2}
        assert float(last_row[1]) == pytest.approx(0.86466, abs=1e-3)

    def test_json_format(self):
        code, out = run_cmd(["geodesic", "--metric", "quartic",
                             "--y", "1,0.4", "--t-end", "1",
                             "--format", "json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["max_deviation"] < 1e-6
        assert not doc["chart_exit"]

    def test_nonpositive_t_end_exits_two(self):
        code, _ = run_cmd(["geodesic", "--metric", "funk", "--y", "1,0",
                           "--t-end", "0"])
        assert code == 2


class TestCustomMetricFiles:
    def test_good_randers_file(self, tmp_path):
        doc = {"type": "randers", "dim": 2, "name": "shifted",
               "a": [[1.0, 0.0], [0.0, 1.0]], "b": [0.3, 0.0]}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        code, out = run_cmd(["check", "--file", str(path),
                             "--suite", "algebraic", "--samples", "4"])
        assert code == 0
        assert json.loads(out)["passed"]

    def test_inadmissible_randers_file(self, tmp_path):
        doc = {"type": "randers", "dim": 2, "name": "bad",
               "a": [[1.0, 0.0], [0.0, 1.0]], "b": [1.2, 0.0]}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        code, _ = run_cmd(["check", "--file", str(path)])
        assert code == 2

    def test_missing_file(self):
        code, _ = run_cmd(["check", "--file", "/no/such/file.json"])
        assert code == 2

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        code, _ = run_cmd(["check", "--file", str(path)])
        assert code == 2


class TestRunConfig:
    def test_round_trip(self):
        cfg = RunConfig(command="check", metric="sphere", dim=3, seed=7,
                        samples=12, suite="algebraic", fmt="markdown",
                        tol_overrides={"sigma": 1e-3})
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_default_format_depends_on_command(self):
        p = build_parser()
        geo = config_from_args(p.parse_args(["geodesic", "--y", "1,0"]))
        chk = config_from_args(p.parse_args(["check"]))
        assert geo.fmt == "csv"
        assert chk.fmt == "json"

    def test_tolerance_overrides_collected(self):
        p = build_parser()
        cfg = config_from_args(p.parse_args(
            ["check", "--tol-sigma", "1e-2", "--tol-flow", "1e-1"]))
        assert cfg.tol_overrides == {"sigma": 1e-2, "flow": 1e-1}

    def test_direct_handler_raises_config_error(self):
        with pytest.raises(ConfigError):
            cmd_tensors(RunConfig(command="tensors", metric="funk"),
                        out=io.StringIO())
