"""Command-line front end: run check suites, dump tensors, integrate
geodesics.

Exit codes are a stable contract: 0 all non-skipped checks pass, 1 at least
one check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import flows, measures, oracle, verify
from .metrics import (AdmissibilityError, CustomMetricError, MetricSpec,
                      get_metric, load_metric)
from .tensors import GeometryPack, DegenerateFlagError


class ConfigError(ValueError):
    """Invalid CLI configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    metric: str = "funk"
    file: Optional[str] = None
    dim: int = 2
    seed: int = 0
    samples: int = 30
    suite: str = "full"
    fmt: str = "json"
    quad_res: Optional[int] = None
    oracle: bool = False
    select: Optional[str] = None
    x: Optional[str] = None
    y: Optional[str] = None
    u: Optional[str] = None
    t_end: float = 1.0
    tol_overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


def _parse_vector(text: str, dim: int, flag: str) -> np.ndarray:
    try:
        vals = [float(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated floats, "
                          f"got {text!r}")
    if len(vals) != dim:
        raise ConfigError(f"{flag}: expected {dim} components, "
                          f"got {len(vals)}")
    return np.asarray(vals)


def _resolve_metric(cfg: RunConfig) -> MetricSpec:
    if cfg.file:
        try:
            with open(cfg.file) as fh:
                return load_metric(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"--file: no such file {cfg.file!r}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"--file {cfg.file}: invalid JSON ({e})")
        except (CustomMetricError, AdmissibilityError) as e:
            raise ConfigError(f"--file {cfg.file}: {e}")
    try:
        return get_metric(cfg.metric, cfg.dim)
    except KeyError as e:
        raise ConfigError(str(e.args[0]))
    except ValueError as e:
        raise ConfigError(str(e))


def _tolerances(cfg: RunConfig) -> verify.Tolerances:
    base = verify.Tolerances()
    bad = set(cfg.tol_overrides) - {"algebraic", "x_derivative",
                                    "sigma", "flow"}
    if bad:
        raise ConfigError(f"unknown tolerance class(es): {sorted(bad)}")
    return verify.Tolerances(**{**asdict(base), **cfg.tol_overrides})


# ---------------------------------------------------------------------------
# check


def cmd_check(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    metric = _resolve_metric(cfg)
    tols = _tolerances(cfg)
    try:
        reports = verify.run_suite(metric, cfg.suite, cfg.samples,
                                   seed=cfg.seed, tols=tols,
                                   quad_res=cfg.quad_res)
    except KeyError as e:
        raise ConfigError(str(e.args[0]))
    doc = verify.suite_document(metric, reports, cfg.suite,
                                cfg.samples, cfg.seed)
    doc["config"] = cfg.to_dict()
    if cfg.fmt == "json":
        json.dump(doc, out, indent=2)
        out.write("\n")
    elif cfg.fmt == "markdown":
        out.write(verify.to_markdown(doc))
    elif cfg.fmt == "csv":
        out.write(verify.to_csv(doc))
    else:
        raise ConfigError(f"unknown format {cfg.fmt!r}")
    return 0 if doc["passed"] else 1


# ---------------------------------------------------------------------------
# tensors

_TENSOR_KEYS = ("F", "g", "g_inv", "C", "I", "G", "N", "Gamma", "B", "E",
                "L", "J", "R", "S", "tau", "K")


def _tensor_value(key: str, pk: GeometryPack, metric: MetricSpec,
                  u: Optional[np.ndarray], quad_res: Optional[int]):
    if key == "F":
        return pk.F
    if key == "g":
        return pk.g
    if key == "g_inv":
        return pk.g_inv
    if key == "C":
        return pk.cartan
    if key == "I":
        return pk.mean_cartan
    if key == "G":
        return pk.spray
    if key == "N":
        return pk.nonlinear_connection
    if key == "Gamma":
        return pk.berwald_connection
    if key == "B":
        return pk.berwald
    if key == "E":
        return pk.mean_berwald
    if key == "L":
        return pk.landsberg
    if key == "J":
        return pk.mean_landsberg
    if key == "R":
        return pk.riemann
    if key == "S":
        return measures.s_curvature(metric, pk.state, pack=pk, res=quad_res)
    if key == "tau":
        return measures.distortion(metric, pk.state, pack=pk, res=quad_res)
    if key == "K":
        if u is None:
            raise ConfigError("--select K requires --u (the flag edge)")
        return pk.flag_curvature(u)
    raise ConfigError(f"unknown tensor key {key!r}; "
                      f"known: {', '.join(_TENSOR_KEYS)}")


def _oracle_delta(key: str, pk: GeometryPack, metric: MetricSpec,
                  u: Optional[np.ndarray]) -> Optional[float]:
    x, y = pk.state.x, pk.state.y
    if key == "g":
        return float(np.max(np.abs(pk.g - oracle.fd_metric_tensor(metric, x, y))))
    if key == "C":
        return float(np.max(np.abs(pk.cartan - oracle.fd_cartan(metric, x, y))))
    if key == "G":
        return float(np.max(np.abs(pk.spray - oracle.fd_spray(metric, x, y))))
    if key == "R":
        return float(np.max(np.abs(pk.riemann - oracle.fd_riemann(metric, x, y))))
    if key == "K" and u is not None:
        return abs(pk.flag_curvature(u)
                   - oracle.fd_flag_curvature(metric, x, y, u))
    return None


def cmd_tensors(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    metric = _resolve_metric(cfg)
    if cfg.y is None:
        raise ConfigError("tensors requires --y")
    x = (_parse_vector(cfg.x, metric.dim, "--x") if cfg.x
         else np.zeros(metric.dim))
    y = _parse_vector(cfg.y, metric.dim, "--y")
    u = _parse_vector(cfg.u, metric.dim, "--u") if cfg.u else None
    try:
        st = metric.point(x, y)
    except AdmissibilityError as e:
        raise ConfigError(str(e))
    pk = GeometryPack(metric, st)
    keys = ([k.strip() for k in cfg.select.split(",")] if cfg.select
            else ["F", "g", "C", "I", "G", "N", "B", "L", "J", "R"])
    doc = {"metric": metric.name, "dim": metric.dim,
           "x": x.tolist(), "y": y.tolist(), "tensors": {}}
    for key in keys:
        try:
            val = _tensor_value(key, pk, metric, u, cfg.quad_res)
        except DegenerateFlagError as e:
            raise ConfigError(str(e))
        entry = {"value": val.tolist() if isinstance(val, np.ndarray)
                 else float(val)}
        if cfg.oracle:
            delta = _oracle_delta(key, pk, metric, u)
            if delta is not None:
                entry["oracle_delta"] = delta
        doc["tensors"][key] = entry
    if cfg.fmt == "markdown":
        lines = [f"# {metric.name} (n = {metric.dim}) at x={x.tolist()}, "
                 f"y={y.tolist()}", ""]
        for key, entry in doc["tensors"].items():
            lines.append(f"## {key}")
            lines.append("```")
            lines.append(str(np.asarray(entry["value"])))
            lines.append("```")
            if "oracle_delta" in entry:
                lines.append(f"max FD-oracle delta: "
                             f"{entry['oracle_delta']:.3e}")
            lines.append("")
        out.write("\n".join(lines))
    else:
        json.dump(doc, out, indent=2)
        out.write("\n")
    return 0


# ---------------------------------------------------------------------------
# geodesic


def cmd_geodesic(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    metric = _resolve_metric(cfg)
    if cfg.y is None:
        raise ConfigError("geodesic requires --y (initial direction)")
    x0 = (_parse_vector(cfg.x, metric.dim, "--x") if cfg.x
          else np.zeros(metric.dim))
    y0 = _parse_vector(cfg.y, metric.dim, "--y")
    if cfg.t_end <= 0:
        raise ConfigError("--t-end must be positive")
    try:
        fc = flows.tau_flow_check(metric, x0, y0, cfg.t_end,
                                  res=cfg.quad_res)
        path = flows.geodesic(metric, x0,
                              y0 / metric.eval(x0, y0), cfg.t_end)
    except AdmissibilityError as e:
        raise ConfigError(str(e))
    n = metric.dim
    rows = []
    for i, t in enumerate(fc.t):
        x, v = path.state(min(t, path.t_end))
        rows.append([t, *x, *v, metric.eval(x, v), fc.tau[i], fc.s[i],
                     fc.s_integral[i]])
    header = (["t"] + [f"x{i + 1}" for i in range(n)]
              + [f"v{i + 1}" for i in range(n)]
              + ["F", "tau", "S", "S_integral"])
    if cfg.fmt == "json":
        json.dump({"metric": metric.name, "columns": header,
                   "rows": rows, "max_deviation": fc.max_deviation,
                   "slope": fc.slope, "chart_exit": fc.chart_exit},
                  out, indent=2)
        out.write("\n")
    else:
        w = csv.writer(out)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" for v in row])
        out.write(f"# max_deviation={fc.max_deviation:.6e} "
                  f"slope={fc.slope:.6f} chart_exit={fc.chart_exit}\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="finslerlab",
        description="Finsler geometry engine: curvature stack from the "
                    "length function, with numerical identity verification.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--metric", default="funk",
                        help="zoo metric name (default: funk)")
        sp.add_argument("--file", help="custom metric JSON file")
        sp.add_argument("--dim", type=int, default=2, choices=(2, 3))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--quad-res", type=int, dest="quad_res",
                        help="volume-density quadrature resolution")
        sp.add_argument("--format", dest="fmt", default=None,
                        choices=("json", "markdown", "csv"))

    sp = sub.add_parser("check", help="run an identity suite")
    common(sp)
    sp.add_argument("--suite", default="full",
                    choices=sorted(verify.SUITES))
    sp.add_argument("--samples", type=int, default=30)
    for cls in ("algebraic", "x-derivative", "sigma", "flow"):
        sp.add_argument(f"--tol-{cls}", type=float, default=None,
                        dest=f"tol_{cls.replace('-', '_')}")

    sp = sub.add_parser("tensors", help="dump curvature tensors at a point")
    common(sp)
    sp.add_argument("--x", help="base point, comma-separated")
    sp.add_argument("--y", help="fiber direction, comma-separated")
    sp.add_argument("--u", help="flag edge for K, comma-separated")
    sp.add_argument("--select", help="comma-separated tensor keys "
                    f"({', '.join(_TENSOR_KEYS)})")
    sp.add_argument("--oracle", action="store_true",
                    help="include finite-difference oracle deltas")

    sp = sub.add_parser("geodesic",
                        help="integrate a unit-speed geodesic and the "
                             "distortion flow law")
    common(sp)
    sp.add_argument("--x", help="start point, comma-separated")
    sp.add_argument("--y", help="initial direction, comma-separated")
    sp.add_argument("--t-end", type=float, default=1.0, dest="t_end")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    tol_overrides = {}
    for cls in ("algebraic", "x_derivative", "sigma", "flow"):
        v = getattr(ns, f"tol_{cls}", None)
        if v is not None:
            if v <= 0:
                raise ConfigError(f"--tol-{cls.replace('_', '-')}: "
                                  f"must be positive")
            tol_overrides[cls] = v
    fmt = ns.fmt or ("csv" if ns.command == "geodesic" else "json")
    return RunConfig(
        command=ns.command, metric=ns.metric, file=ns.file, dim=ns.dim,
        seed=ns.seed, samples=getattr(ns, "samples", 30),
        suite=getattr(ns, "suite", "full"), fmt=fmt, quad_res=ns.quad_res,
        oracle=getattr(ns, "oracle", False),
        select=getattr(ns, "select", None), x=getattr(ns, "x", None),
        y=getattr(ns, "y", None), u=getattr(ns, "u", None),
        t_end=getattr(ns, "t_end", 1.0), tol_overrides=tol_overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        cfg = config_from_args(ns)
        handler = {"check": cmd_check, "tensors": cmd_tensors,
                   "geodesic": cmd_geodesic}[cfg.command]
        return handler(cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (AdmissibilityError, CustomMetricError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
