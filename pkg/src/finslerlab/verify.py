"""Identity-suite registry and theorem-witness summaries.

Every registered check carries an anchor: the mathematical identity it
verifies, written out, or the literal tag "plumbing" for infrastructure
checks.  Residuals are max-norm relative to the largest participating term;
tolerances come from a central ladder keyed by how many noisy operations
(x-derivatives, volume quadrature, flow integration) the identity consumes.

Runs are deterministic: the sample states and every random draw depend only
on (metric, seed, check id).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import calculus, flows, measures
from .metrics import MetricSpec, hash_name, sample_states
from .tensors import GeometryPack, PositivityError

SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema_version", "metric", "dim", "suite", "seed",
                 "samples", "reports", "passed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "metric": {"type": "string"},
        "dim": {"type": "integer", "minimum": 2},
        "suite": {"type": "string"},
        "seed": {"type": "integer"},
        "samples": {"type": "integer", "minimum": 1},
        "backend": {"type": "string"},
        "passed": {"type": "boolean"},
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["check_id", "anchor", "metric", "detail",
                             "residual", "tol", "passed", "skipped"],
                "properties": {
                    "check_id": {"type": "string"},
                    "anchor": {"type": "string", "minLength": 1},
                    "metric": {"type": "string"},
                    "detail": {"type": "string"},
                    "residual": {"type": ["number", "null"]},
                    "tol": {"type": ["number", "null"]},
                    "passed": {"type": "boolean"},
                    "skipped": {"type": "boolean"},
                    "notes": {"type": "string"},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Tolerances:
    """Residual budget by identity class.

    algebraic: pure fiber (y) calculus at one point
    x_derivative: one horizontal derivative enters
    sigma: the quadrature-differentiated volume density enters
    flow: an ODE integration enters
    """
    algebraic: float = 1e-8
    x_derivative: float = 1e-6
    sigma: float = 1e-4
    flow: float = 5e-3

    def get(self, cls: str) -> float:
        return getattr(self, cls)


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    anchor: str
    metric: str
    detail: str
    residual: Optional[float]
    tol: Optional[float]
    passed: bool
    skipped: bool = False
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "metric": self.metric,
            "detail": self.detail,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            "skipped": self.skipped,
            "notes": self.notes,
        }


class RunContext:
    """Shared per-run state: sampled points, cached packs, seeded RNG."""

    def __init__(self, metric: MetricSpec, samples: int, seed: int,
                 tols: Tolerances, quad_res: Optional[int] = None):
        self.metric = metric
        self.samples = samples
        self.seed = seed
        self.tols = tols
        self.quad_res = quad_res
        self.states = sample_states(metric, samples, seed=seed)
        self._packs: dict[int, GeometryPack] = {}

    def pack(self, i: int) -> GeometryPack:
        if i not in self._packs:
            self._packs[i] = GeometryPack(self.metric, self.states[i])
        return self._packs[i]

    def rng(self, check_id: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, hash_name(check_id)])

    def random_vector(self, rng) -> np.ndarray:
        v = rng.standard_normal(self.metric.dim)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Check:
    check_id: str
    anchor: str
    tol_class: str
    fn: Callable[["RunContext", "Check"], list[CheckReport]]
    applies: Callable[[MetricSpec], bool] = lambda spec: True
    heavy: bool = False       # uses quadrature or flow machinery

    def report(self, ctx: RunContext, detail: str, residual: float,
               tol: Optional[float] = None, notes: str = "") -> CheckReport:
        tol = ctx.tols.get(self.tol_class) if tol is None else tol
        return CheckReport(check_id=self.check_id, anchor=self.anchor,
                           metric=ctx.metric.name, detail=detail,
                           residual=float(residual), tol=tol,
                           passed=bool(residual <= tol), notes=notes)

    def skipped_report(self, ctx: RunContext, reason: str) -> CheckReport:
        return CheckReport(check_id=self.check_id, anchor=self.anchor,
                           metric=ctx.metric.name, detail="skipped",
                           residual=None, tol=None, passed=True,
                           skipped=True, notes=reason)


def _rel(res, *terms) -> float:
    return calculus.rel_residual(np.asarray(res), *map(np.asarray, terms))


# ---------------------------------------------------------------------------
# check implementations


def _chk_homogeneity(ctx, chk):
    worst = 0.0
    for st in ctx.states:
        for lam in (0.5, 2.0, 10.0):
            f = ctx.metric.eval(st.x, lam * st.y)
            worst = max(worst, abs(f - lam * st.F) / (lam * st.F))
    return [chk.report(ctx, f"{len(ctx.states)} points x 3 scalings", worst,
                       tol=1e-10)]


def _chk_positive_definite(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        try:
            g = ctx.pack(i).g
        except PositivityError:
            return [chk.report(ctx, "fundamental tensor eigenvalues", 1.0,
                               notes="Cholesky factorization failed")]
        ev = np.linalg.eigvalsh(g)
        worst = max(worst, max(0.0, -ev[0] / ev[-1]))
    return [chk.report(ctx, "fundamental tensor eigenvalues", worst)]


def _chk_flagpole(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        y = pk.state.y
        parts = [
            _rel(pk.cartan @ y, pk.cartan, pk.g),
            _rel(pk.mean_cartan @ y, pk.mean_cartan, pk.g),
            _rel(pk.angular @ y, pk.angular),
            _rel(pk.landsberg @ y, pk.landsberg, pk.g),
            _rel(pk.mean_landsberg @ y, pk.mean_landsberg, pk.g),
            _rel(pk.riemann @ y, pk.riemann, pk.F ** 2 * np.eye(pk.n)),
        ]
        worst = max(worst, max(parts))
    return [chk.report(ctx, "C, I, h, L, J, R contracted with y", worst)]


def _chk_berwald_symmetry(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        b = ctx.pack(i).berwald
        res = max(np.max(np.abs(b - b.transpose(0, 2, 3, 1))),
                  np.max(np.abs(b - b.transpose(0, 3, 1, 2))))
        worst = max(worst, _rel(res, b, np.ones(1)))
    return [chk.report(ctx, "cyclic lower-index permutations of B", worst)]


def _chk_riemann_reconstruction(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        res = pk.riemann_kl @ pk.state.y - pk.riemann
        worst = max(worst, _rel(res, pk.riemann, pk.F ** 2 * np.eye(pk.n)))
    return [chk.report(ctx, "last-index contraction vs. R^i_k", worst)]


def _chk_funk_pde(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        fj = pk.F_jet
        for k in range(pk.n):
            res = fj.deriv_value(alpha=k) - fj.value * fj.deriv_value(beta=k)
            worst = max(worst, abs(res) / fj.value ** 2)
    return [chk.report(ctx, "x- vs. y-gradient coupling", worst)]


def _chk_isotropic_berwald(ctx, chk):
    phi = ctx.metric.known_phi
    rng = ctx.rng(chk.check_id)
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        u, v, w = (ctx.random_vector(rng) for _ in range(3))
        lhs = pk.berwald_apply(u, v, w)
        rhs = pk.isotropic_berwald_rhs(phi, u, v, w)
        # unit-coefficient bracket keeps the scale alive when Phi = 0
        unit = pk.isotropic_berwald_rhs(1.0, u, v, w)
        worst = max(worst, _rel(lhs - rhs, lhs, rhs, unit))
    return [chk.report(ctx, "random (u, v, w) triples", worst)]


def _chk_landsberg_form(ctx, chk):
    # with L_y(u,v,w) = -1/2 g_y(B_y(u,v,w), y), pairing y into the
    # isotropic Berwald bracket gives L = -Phi F C (the h-terms die on y)
    phi = ctx.metric.known_phi
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        res = pk.landsberg + phi * pk.F * pk.cartan
        worst = max(worst, _rel(res, pk.landsberg, pk.F * pk.cartan, pk.g))
    return [chk.report(ctx, f"L vs. -{phi} F C", worst,
                       notes="sign fixed by L := -1/2 g(B(u,v,w), y)")]


def _chk_mean_landsberg_form(ctx, chk):
    phi = ctx.metric.known_phi
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        res = pk.mean_landsberg + phi * pk.F * pk.mean_cartan
        worst = max(worst, _rel(res, pk.mean_landsberg,
                                pk.F * pk.mean_cartan, pk.g))
    return [chk.report(ctx, f"J vs. -{phi} F I", worst,
                       notes="trace of the Landsberg proportionality")]


def _chk_mean_landsberg_rate(ctx, chk):
    phi = ctx.metric.known_phi
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        rate = calculus.mean_landsberg_rate(pk)
        res = rate - phi ** 2 * pk.F ** 2 * pk.mean_cartan
        worst = max(worst, _rel(res, rate,
                                pk.F ** 2 * pk.mean_cartan, pk.g))
    # one more x-derivative than the L, J checks
    return [chk.report(ctx, f"J' vs. {phi}^2 F^2 I", worst,
                       tol=10.0 * ctx.tols.x_derivative)]


def _chk_mean_berwald_form(ctx, chk):
    phi = ctx.metric.known_phi
    worst = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        model = 0.5 * (pk.n + 1) * phi / pk.F * pk.angular
        res = pk.mean_berwald - model
        worst = max(worst, _rel(res, pk.mean_berwald, model,
                                pk.angular / pk.F))
    return [chk.report(ctx, f"E vs. (n+1)/2 {phi} F^-1 h", worst,
                       tol=10.0 * ctx.tols.x_derivative)]


def _chk_metric_compatibility(ctx, chk):
    worst_h = worst_v = 0.0
    for i in range(len(ctx.states)):
        rh, rv = calculus.metric_compatibility_residuals(ctx.pack(i))
        worst_h = max(worst_h, rh)
        worst_v = max(worst_v, rv)
    return [
        chk.report(ctx, "horizontal: g vs. -2L", worst_h,
                   tol=ctx.tols.x_derivative),
        chk.report(ctx, "vertical: g vs. 2C", worst_v,
                   tol=ctx.tols.algebraic),
    ]


def _chk_length_parallel(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        worst = max(worst, calculus.length_horizontal_residual(ctx.pack(i)))
    return [chk.report(ctx, "horizontal derivative of F", worst)]


def _chk_landsberg_rate_identity(ctx, chk):
    worst = 0.0
    for i in range(len(ctx.states)):
        worst = max(worst, calculus.landsberg_flow_residual(ctx.pack(i)))
    tol = ctx.tols.x_derivative
    if not ctx.metric.is_berwald:
        tol *= 10.0           # Funk-type: deeper derivative stack on L'
    return [chk.report(ctx, "rate of L vs. curvature terms", worst, tol=tol)]


def _chk_s_rate_identity(ctx, chk):
    worst = 0.0
    count = min(len(ctx.states), 8)
    for i in range(count):
        pk = ctx.pack(i)
        worst = max(worst, measures.s_identity_residual(
            ctx.metric, pk.state, pack=pk, res=ctx.quad_res))
    tol = 10.0 * ctx.tols.sigma if not ctx.metric.is_berwald \
        else ctx.tols.sigma / 10.0
    return [chk.report(ctx, f"{count} points", worst, tol=tol)]


def _chk_mean_landsberg_rate_identity(ctx, chk):
    worst = 0.0
    count = min(len(ctx.states), 8)
    for i in range(count):
        pk = ctx.pack(i)
        sj = measures.SCurvatureJet(ctx.metric, pk, res=ctx.quad_res)
        worst = max(worst, calculus.mean_landsberg_flow_residual(pk, sj))
    tol = ctx.tols.sigma if not ctx.metric.is_berwald \
        else ctx.tols.sigma / 10.0
    return [chk.report(ctx, f"{count} points", worst, tol=tol)]


def _chk_riemann_mean_cartan(ctx, chk):
    spec = ctx.metric
    out = []
    if spec.is_berwald:
        worst = 0.0
        for i in range(len(ctx.states)):
            worst = max(worst,
                        calculus.riemann_mean_cartan_residual(ctx.pack(i)))
        out.append(chk.report(ctx, "R applied to the mean Cartan vector",
                              worst, tol=ctx.tols.algebraic))
        return out
    phi = spec.known_phi
    worst = 0.0
    worst_k = 0.0
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        worst = max(worst, calculus.riemann_mean_cartan_residual(pk, phi=phi))
        i_up = pk.g_inv @ pk.mean_cartan
        k = pk.flag_curvature(i_up)
        worst_k = max(worst_k, abs(k + phi ** 2))
    out.append(chk.report(ctx, "eigen-relation on the mean Cartan vector",
                          worst, tol=ctx.tols.x_derivative))
    out.append(chk.report(ctx, "flag curvature of span{I, y}", worst_k,
                          tol=10.0 * ctx.tols.x_derivative,
                          notes=f"expected K = {-phi ** 2}"))
    return out


def _chk_flag_scan(ctx, chk):
    k0 = ctx.metric.known_flag_curvature
    rng = ctx.rng(chk.check_id)
    vals = []
    per_state = max(1, -(-200 // len(ctx.states)))
    for i in range(len(ctx.states)):
        pk = ctx.pack(i)
        drawn = 0
        while drawn < per_state:
            u = ctx.random_vector(rng)
            try:
                vals.append(pk.flag_curvature(u))
            except ValueError:
                continue      # u too close to the flagpole; redraw
            drawn += 1
    vals = np.array(vals)
    worst = float(np.max(np.abs(vals - k0))) / max(1.0, abs(k0))
    notes = (f"{vals.size} flags, min={vals.min():.8f}, "
             f"max={vals.max():.8f}, expected {k0}")
    return [chk.report(ctx, f"{vals.size} random flags", worst,
                       tol=ctx.tols.x_derivative, notes=notes)]


def _chk_s_isotropy(ctx, chk):
    spec = ctx.metric
    worst = 0.0
    count = min(len(ctx.states), 30)
    for i in range(count):
        pk = ctx.pack(i)
        s = measures.s_curvature(spec, pk.state, pack=pk, res=ctx.quad_res)
        if spec.known_s_factor is not None:
            worst = max(worst, abs(s - spec.known_s_factor * pk.F))
        else:
            worst = max(worst, abs(s))
    tol = 20.0 * ctx.tols.sigma if spec.known_s_factor is not None \
        else ctx.tols.x_derivative
    return [chk.report(ctx, f"{count} points", worst, tol=tol)]


def _chk_tau_flow(ctx, chk):
    x0 = np.zeros(ctx.metric.dim)
    y0 = ctx.states[0].y
    fc = flows.tau_flow_check(ctx.metric, x0, y0, t_end=1.0,
                              grid_points=41, res=ctx.quad_res)
    notes = f"slope={fc.slope:.6f}, chart_exit={fc.chart_exit}"
    return [chk.report(ctx, "unit-speed geodesic from the origin, t in [0,1]",
                       fc.max_deviation, notes=notes)]


def _has_phi(spec):
    return spec.known_phi is not None


REGISTRY: tuple[Check, ...] = (
    Check("homogeneity", "F(x, t y) = t F(x, y) for t > 0",
          "algebraic", _chk_homogeneity),
    Check("positive-definite", "g_y is positive-definite on the slit bundle",
          "algebraic", _chk_positive_definite),
    Check("flagpole-annihilation",
          "C(y,.,.) = I(y) = h(y,.) = L(y,.,.) = J(y) = R(y) = 0",
          "algebraic", _chk_flagpole),
    Check("berwald-symmetry", "B^h_ijk = B^h_jki = B^h_kij",
          "algebraic", _chk_berwald_symmetry),
    Check("riemann-reconstruction",
          "3 R^i_kl = dR^i_k/dy^l - dR^i_l/dy^k and R^i_kl y^l = R^i_k",
          "algebraic", _chk_riemann_reconstruction),
    Check("funk-pde", "F_{x^k} = F F_{y^k}", "algebraic", _chk_funk_pde,
          applies=lambda s: s.name.startswith("funk")),
    Check("isotropic-berwald",
          "B_y(u,v,w) = Phi { F_yy(u,v) w + F_yy(v,w) u + F_yy(w,u) v "
          "+ F_yyy(u,v,w) y }",
          "x_derivative", _chk_isotropic_berwald, applies=_has_phi),
    Check("landsberg-form", "L + Phi F C = 0", "x_derivative",
          _chk_landsberg_form, applies=_has_phi),
    Check("mean-landsberg-form", "J + Phi F I = 0", "x_derivative",
          _chk_mean_landsberg_form, applies=_has_phi),
    Check("mean-landsberg-rate", "J' = Phi^2 F^2 I",
          "x_derivative", _chk_mean_landsberg_rate, applies=_has_phi),
    Check("mean-berwald-form", "E = (n+1)/2 Phi F^-1 h", "x_derivative",
          _chk_mean_berwald_form, applies=_has_phi),
    Check("metric-compatibility", "g_{ij|k} = -2 L_ijk and g_{ij.k} = 2 C_ijk",
          "x_derivative", _chk_metric_compatibility),
    Check("length-parallel", "F_{|m} = 0", "x_derivative",
          _chk_length_parallel),
    Check("landsberg-rate-identity",
          "L_{ijk|m} y^m + C_{ijm} R^m_k = -1/3 (g_im R^m_{k.j} "
          "+ g_jm R^m_{k.i}) - 1/6 (g_im R^m_{j.k} + g_jm R^m_{i.k})",
          "x_derivative", _chk_landsberg_rate_identity),
    Check("s-rate-identity",
          "S_{.k|m} y^m - S_{|k} = -1/3 (2 R^m_{k.m} + R^m_{m.k})",
          "sigma", _chk_s_rate_identity, heavy=True),
    Check("mean-landsberg-rate-identity",
          "J_{k|m} y^m + I_m R^m_k = S_{.k|m} y^m - S_{|k}",
          "sigma", _chk_mean_landsberg_rate_identity, heavy=True),
    Check("s-isotropy", "S = (n+1) Phi F (isotropic); S = 0 (Berwald)",
          "sigma", _chk_s_isotropy, heavy=True,
          applies=lambda s: s.known_s_factor is not None or s.is_berwald),
    Check("riemann-mean-cartan",
          "R(I) = 0 (Berwald); Phi^2 F^2 I + R(I) = 0 and "
          "K(span{I, y}, y) = -Phi^2 (constant isotropic)",
          "x_derivative", _chk_riemann_mean_cartan,
          applies=lambda s: s.is_berwald or _has_phi(s)),
    Check("flag-scan", "flag curvature constancy over random flags",
          "x_derivative", _chk_flag_scan,
          applies=lambda s: s.known_flag_curvature is not None),
    Check("tau-flow",
          "tau(t) - tau(0) = integral of S along a unit-speed geodesic",
          "flow", _chk_tau_flow, heavy=True),
)


SUITES = {
    "full": tuple(c.check_id for c in REGISTRY),
    "algebraic": tuple(c.check_id for c in REGISTRY if not c.heavy),
}


def run_suite(metric: MetricSpec, suite: str = "full", samples: int = 30,
              seed: int = 0, tols: Tolerances | None = None,
              quad_res: int | None = None) -> list[CheckReport]:
    """Run every applicable registered check; returns sorted reports."""
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; "
                       f"available: {sorted(SUITES)}")
    if samples < 1:
        raise ValueError("samples must be positive")
    tols = tols or Tolerances()
    ctx = RunContext(metric, samples, seed, tols, quad_res=quad_res)
    selected = [c for c in REGISTRY if c.check_id in SUITES[suite]]

    def run_one(chk: Check) -> list[CheckReport]:
        if not chk.applies(metric):
            return [chk.skipped_report(ctx, "not applicable to this metric")]
        return chk.fn(ctx, chk)

    workers = int(os.environ.get("FINSLERLAB_THREADS", "1"))
    if workers > 1:
        # warm the shared pack cache serially; jet packs are not thread-safe
        # to build concurrently through the lru caches they touch
        for i in range(len(ctx.states)):
            ctx.pack(i)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(run_one, selected))
    else:
        chunks = [run_one(c) for c in selected]
    reports = [r for chunk in chunks for r in chunk]
    reports.sort(key=lambda r: (r.check_id, r.detail))
    return reports


def suite_document(metric: MetricSpec, reports: list[CheckReport],
                   suite: str, samples: int, seed: int) -> dict:
    from ._kernel import BACKEND
    return {
        "schema_version": SCHEMA_VERSION,
        "metric": metric.name,
        "dim": metric.dim,
        "suite": suite,
        "seed": seed,
        "samples": samples,
        "backend": BACKEND,
        "passed": all(r.passed for r in reports if not r.skipped),
        "reports": [r.to_dict() for r in reports],
    }


# ---------------------------------------------------------------------------
# theorem witnesses


THEOREMS = ("berwald-rigidity", "isotropic-rigidity", "tau-growth")


def _scan_stats(reports, check_id):
    for r in reports:
        if r.check_id == check_id and not r.skipped:
            return r
    return None


def theorem_witness(metric: MetricSpec, theorem_id: str,
                    reports: list[CheckReport], seed: int = 0) -> dict:
    """Consistency verdict for a rigidity statement on one zoo witness.

    Never a proof: the summary records what was sampled and whether the
    observed data sit on the side of the dichotomy the statement predicts.
    """
    if theorem_id not in THEOREMS:
        raise KeyError(f"unknown theorem id {theorem_id!r}; "
                       f"available: {THEOREMS}")
    out = {"theorem": theorem_id, "metric": metric.name, "dim": metric.dim}
    states = sample_states(metric, 20, seed=seed)
    packs = [GeometryPack(metric, st) for st in states]

    if theorem_id == "berwald-rigidity":
        # Berwald dichotomy: B = 0 and K nowhere zero forces Riemannian
        # (C = 0); B = 0 and R = 0 forces locally Minkowskian.
        b_max = max(float(np.max(np.abs(pk.berwald))) for pk in packs)
        r_max = max(float(np.max(np.abs(pk.riemann))) / pk.F ** 2
                    for pk in packs)
        i_max = max(float(np.max(np.abs(pk.mean_cartan))) for pk in packs)
        scan = _scan_stats(reports, "flag-scan")
        out.update(berwald_max=b_max, riemann_max_rel=r_max,
                   mean_cartan_max=i_max,
                   flag_scan=scan.notes if scan else "unavailable")
        if b_max > 1e-8:
            out["verdict"] = ("not Berwald on the sampled set; "
                              "hypothesis fails, no conclusion expected")
            out["consistent"] = True
        elif r_max <= 1e-10:
            out["verdict"] = (
                f"B = 0 and R = 0 sampled; locally Minkowskian branch "
                f"(max|I| = {i_max:.2e} may be nonzero)")
            out["consistent"] = metric.is_locally_minkowskian
        else:
            out["verdict"] = (
                f"B = 0 and K nowhere zero on {len(packs)} samples; "
                f"Riemannian branch predicts C = I = 0, observed "
                f"max|I| = {i_max:.2e}")
            out["consistent"] = i_max <= 1e-9 and metric.is_riemannian
        return out

    if theorem_id == "isotropic-rigidity":
        # constant isotropic Berwald curvature with K >= 0 would force
        # Phi = 0; a witness with Phi != 0 must therefore have negative K
        scan = _scan_stats(reports, "flag-scan")
        phi = metric.known_phi
        k0 = metric.known_flag_curvature
        out.update(phi=phi, flag_scan=scan.notes if scan else "unavailable")
        if phi is None:
            out["verdict"] = "no constant isotropic structure declared; vacuous"
            out["consistent"] = True
        elif phi != 0.0:
            ok = k0 is not None and k0 < 0.0
            out["verdict"] = (
                f"Phi = {phi} != 0 with K = {k0} < 0: hypothesis K >= 0 "
                f"violated, rigid conclusion not expected; consistent"
                if ok else
                f"Phi = {phi} != 0 but K = {k0} is not negative: "
                f"contradicts the rigidity statement")
            out["consistent"] = ok
        else:
            out["verdict"] = "Phi = 0; statement imposes nothing further"
            out["consistent"] = True
        return out

    # tau-growth: unbounded distortion growth along a geodesic obstructs
    # completeness-with-bounded-distortion; the Funk ray witnesses it
    y0 = states[0].y
    fc = flows.tau_flow_check(metric, np.zeros(metric.dim), y0, t_end=2.0)
    growth = float(fc.tau[-1] - fc.tau[0])
    out.update(tau_growth=growth, slope=fc.slope,
               max_deviation=fc.max_deviation, chart_exit=fc.chart_exit)
    if metric.known_s_factor:
        expected = metric.known_s_factor * 2.0   # unit speed, t_end = 2
        out["verdict"] = (f"tau grew by {growth:.4f} over t in [0, 2] "
                          f"(linear model predicts {expected:.1f}); "
                          f"unbounded growth witnessed")
        out["consistent"] = growth >= 0.95 * expected
    else:
        out["verdict"] = (f"tau changed by {growth:.2e}; bounded, "
                          f"no obstruction")
        out["consistent"] = abs(growth) <= 1e-6 or not metric.is_berwald
    return out


# ---------------------------------------------------------------------------
# rendering


def to_markdown(doc: dict) -> str:
    lines = [
        f"# finslerlab check report",
        "",
        f"- metric: **{doc['metric']}** (n = {doc['dim']})",
        f"- suite: {doc['suite']}, samples: {doc['samples']}, "
        f"seed: {doc['seed']}",
        f"- backend: {doc.get('backend', '?')}",
        f"- overall: {'PASS' if doc['passed'] else 'FAIL'}",
        "",
        "| check | detail | residual | tol | status |",
        "|---|---|---|---|---|",
    ]
    for r in doc["reports"]:
        if r["skipped"]:
            status = "skip"
            resid = tol = "-"
        else:
            status = "pass" if r["passed"] else "FAIL"
            resid = f"{r['residual']:.3e}"
            tol = f"{r['tol']:.1e}"
        lines.append(f"| {r['check_id']} | {r['detail']} | {resid} "
                     f"| {tol} | {status} |")
    return "\n".join(lines) + "\n"


def to_csv(doc: dict) -> str:
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["check_id", "metric", "detail", "residual", "tol",
                "passed", "skipped", "notes"])
    for r in doc["reports"]:
        w.writerow([r["check_id"], r["metric"], r["detail"], r["residual"],
                    r["tol"], r["passed"], r["skipped"], r["notes"]])
    return buf.getvalue()
