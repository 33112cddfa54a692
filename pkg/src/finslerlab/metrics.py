"""Concrete Finsler metrics with declared chart domains and ground truth.

Each zoo entry carries the length function itself plus the structural flags
(Riemannian / Berwald / locally Minkowskian, known flag curvature, known
isotropic Berwald constant) that the verification suites assert against.
Evaluators are generic over floats, NumPy batches, and jets via `smath`.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .jets import FieldHandle
from .smath import dot, sqrt

MIN_NORM_RATIO = 1e-6   # admissibility floor: F(x, y) >= MIN_NORM_RATIO * |y|
RANDERS_MAX_BETA = 0.95  # |b|_a bound keeping g uniformly positive-definite


class AdmissibilityError(ValueError):
    """Point or metric data violating a positivity precondition."""


class CustomMetricError(ValueError):
    """Malformed user-supplied metric description."""


@dataclass(frozen=True)
class PointState:
    """Base point x with admissible direction y and cached length F(x, y)."""

    x: np.ndarray
    y: np.ndarray
    F: float


@dataclass(frozen=True)
class MetricSpec:
    name: str
    dim: int
    field: FieldHandle
    is_riemannian: bool = False
    is_berwald: bool = False
    is_locally_minkowskian: bool = False
    known_flag_curvature: Optional[float] = None
    known_phi: Optional[float] = None
    sample_radius: float = 1.0
    # distance from x to the chart boundary; None means unbounded chart
    boundary_distance: Optional[Callable[[np.ndarray], float]] = None

    @property
    def known_s_factor(self) -> Optional[float]:
        """Multiplier c with S = c * F, i.e. (n+1) * Phi when Phi is known."""
        if self.known_phi is None:
            return None
        return (self.dim + 1) * self.known_phi

    def F(self, x, y):
        return self.field(x, y)

    def eval(self, x: np.ndarray, y: np.ndarray) -> float:
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        return float(self.field(list(xs), list(ys)))

    def point(self, x, y) -> PointState:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(x) != self.dim or len(y) != self.dim:
            raise ValueError(f"expected dimension {self.dim}")
        if not self.field.domain(x):
            raise AdmissibilityError(f"x={x} outside the chart of {self.name}")
        f = self.eval(x, y)
        if not np.isfinite(f) or f < MIN_NORM_RATIO * np.linalg.norm(y):
            raise AdmissibilityError(
                f"direction y={y} not admissible for {self.name} at x={x}")
        return PointState(x, y, f)


# ---------------------------------------------------------------------------
# evaluators


def _euclidean(x, y):
    return sqrt(dot(y, y))


def _quartic(x, y):
    s = y[0] * y[0] * y[0] * y[0]
    for i in range(1, len(y)):
        s = s + y[i] * y[i] * y[i] * y[i]
    return s ** 0.25


def _sphere_chart(x, y):
    # round metric g_ij = 4 delta_ij / (1 + |x|^2)^2, sectional curvature 1
    return 2.0 * sqrt(dot(y, y)) / (1.0 + dot(x, x))


def eval_funk(x, y):
    """Funk length function on the Euclidean unit ball.

    Theta(x, y) = (sqrt(|y|^2 - (|x|^2 |y|^2 - <x,y>^2)) + <x,y>) / (1 - |x|^2)
    """
    xx = dot(x, x)
    yy = dot(y, y)
    xy = dot(x, y)
    return (sqrt(yy - (xx * yy - xy * xy)) + xy) / (1.0 - xx)


def eval_randers(a, b, x, y):
    """Randers length alpha + beta for coefficient fields a(x), b(x).

    a(x) must return a positive-definite matrix as nested scalar-likes, b(x) a
    covector; both generic over floats, arrays, and jets.
    """
    amat = a(x)
    bvec = b(x)
    n = len(y)
    alpha2 = None
    for i in range(n):
        for j in range(n):
            term = amat[i][j] * y[i] * y[j]
            alpha2 = term if alpha2 is None else alpha2 + term
    beta = None
    for i in range(n):
        term = bvec[i] * y[i]
        beta = term if beta is None else beta + term
    return sqrt(alpha2) + beta


def randers_norm_beta(a, b, x: np.ndarray) -> float:
    """|b|_a at a numeric point x; must stay below 1 for admissibility."""
    n = len(x)
    amat = np.array([[float(a(list(x))[i][j]) for j in range(n)]
                     for i in range(n)])
    bvec = np.array([float(v) for v in b(list(x))])
    return float(np.sqrt(bvec @ np.linalg.solve(amat, bvec)))


def _flat_randers_evaluator(bvec: np.ndarray):
    def evaluator(x, y):
        return sqrt(dot(y, y)) + dot(list(bvec), y)
    return evaluator


# ---------------------------------------------------------------------------
# zoo


def _ball_domain(radius: float):
    return lambda x: float(np.dot(x, x)) < radius * radius


def zoo(dim: int = 2) -> list[MetricSpec]:
    """The standard witnesses, instantiable in dimensions 2 and 3."""
    if dim < 2:
        raise ValueError("zoo metrics need dimension >= 2")
    b = np.zeros(dim)
    b[0] = 0.5
    return [
        MetricSpec(
            name="euclidean", dim=dim,
            field=FieldHandle(_euclidean),
            is_riemannian=True, is_berwald=True, is_locally_minkowskian=True,
            known_flag_curvature=0.0, known_phi=0.0,
        ),
        MetricSpec(
            name="quartic", dim=dim,
            field=FieldHandle(_quartic),
            is_riemannian=False, is_berwald=True, is_locally_minkowskian=True,
            known_flag_curvature=0.0, known_phi=0.0,
        ),
        MetricSpec(
            name="sphere", dim=dim,
            field=FieldHandle(_sphere_chart),
            is_riemannian=True, is_berwald=True, is_locally_minkowskian=False,
            known_flag_curvature=1.0, known_phi=0.0,
        ),
        MetricSpec(
            name="randers_flat", dim=dim,
            field=FieldHandle(_flat_randers_evaluator(b)),
            is_riemannian=False, is_berwald=True, is_locally_minkowskian=True,
            known_flag_curvature=0.0, known_phi=0.0,
        ),
        MetricSpec(
            name="funk", dim=dim,
            field=FieldHandle(eval_funk, domain=_ball_domain(1.0)),
            is_riemannian=False, is_berwald=False, is_locally_minkowskian=False,
            known_flag_curvature=-0.25, known_phi=0.5,
            sample_radius=0.6,
            boundary_distance=lambda x: 1.0 - float(np.linalg.norm(x)),
        ),
    ]


def get_metric(name: str, dim: int = 2) -> MetricSpec:
    for spec in zoo(dim):
        if spec.name == name:
            return spec
    raise KeyError(f"unknown metric {name!r}; known: "
                   f"{[s.name for s in zoo(dim)]}")


def sample_states(spec: MetricSpec, count: int, seed: int = 0) -> list[PointState]:
    """Deterministic interior samples: margin >= 0.05, 0.1 <= |y| <= 10."""
    rng = np.random.default_rng([seed, spec.dim, abs(hash_name(spec.name))])
    states = []
    while len(states) < count:
        x = rng.uniform(-spec.sample_radius, spec.sample_radius, spec.dim)
        if not spec.field.domain(x):
            continue
        direction = rng.normal(size=spec.dim)
        direction /= np.linalg.norm(direction)
        mag = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        y = mag * direction
        try:
            states.append(spec.point(x, y))
        except AdmissibilityError:
            continue
    return states


def hash_name(name: str) -> int:
    """Stable small hash (Python's built-in hash is salted per process)."""
    import zlib
    return zlib.crc32(name.encode())


# ---------------------------------------------------------------------------
# user-supplied metrics: tiny arithmetic-expression coefficients over x1..xn


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def compile_expression(src: str, dim: int) -> Callable:
    """Compile an arithmetic expression in x1..xn to a scalar-like function."""
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise CustomMetricError(f"bad expression {src!r}: {exc}") from exc
    names = {f"x{i + 1}": i for i in range(dim)}

    def check(node):
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp):
            if not isinstance(node.op, _ALLOWED_BINOPS):
                raise CustomMetricError(
                    f"operator not allowed in {src!r}")
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.UAdd, ast.USub)):
                raise CustomMetricError(f"operator not allowed in {src!r}")
            check(node.operand)
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise CustomMetricError(f"non-numeric constant in {src!r}")
        elif isinstance(node, ast.Name):
            if node.id not in names:
                raise CustomMetricError(
                    f"unknown name {node.id!r} in {src!r} (use x1..x{dim})")
        else:
            raise CustomMetricError(
                f"construct {type(node).__name__} not allowed in {src!r}")

    check(tree)

    def run(node, xs):
        if isinstance(node, ast.Expression):
            return run(node.body, xs)
        if isinstance(node, ast.BinOp):
            left = run(node.left, xs)
            right = run(node.right, xs)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            return left ** right
        if isinstance(node, ast.UnaryOp):
            v = run(node.operand, xs)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return node.value
        return xs[names[node.id]]

    return lambda xs: run(tree, xs)


def load_metric(source) -> MetricSpec:
    """Build a MetricSpec from a JSON document (path, file object, or dict).

    Schema:
      {"name": str?, "type": "riemannian" | "randers", "dim": int,
       "a": [[expr, ...], ...],       # n x n expressions in x1..xn
       "b": [expr, ...],              # randers only
       "sample_radius": float?}
    """
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    try:
        kind = doc["type"]
        dim = int(doc["dim"])
        a_src = doc["a"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CustomMetricError(f"missing or malformed field: {exc}") from exc
    if kind not in ("riemannian", "randers"):
        raise CustomMetricError(f"type must be riemannian or randers, got {kind!r}")
    if dim < 2:
        raise CustomMetricError("dim must be >= 2")
    if len(a_src) != dim or any(len(row) != dim for row in a_src):
        raise CustomMetricError(f"'a' must be a {dim}x{dim} matrix of expressions")

    a_fns = [[compile_expression(str(e), dim) for e in row] for row in a_src]

    def a(xs):
        return [[a_fns[i][j](xs) for j in range(dim)] for i in range(dim)]

    name = str(doc.get("name", f"custom_{kind}"))
    radius = float(doc.get("sample_radius", 1.0))

    if kind == "riemannian":
        def evaluator(x, y):
            amat = a(x)
            s = None
            for i in range(dim):
                for j in range(dim):
                    term = amat[i][j] * y[i] * y[j]
                    s = term if s is None else s + term
            return sqrt(s)
        spec = MetricSpec(name=name, dim=dim, field=FieldHandle(evaluator),
                          is_riemannian=True, is_berwald=True,
                          sample_radius=radius)
    else:
        if "b" not in doc or len(doc["b"]) != dim:
            raise CustomMetricError(f"'b' must be a length-{dim} covector")
        b_fns = [compile_expression(str(e), dim) for e in doc["b"]]

        def b(xs):
            return [f(xs) for f in b_fns]

        def evaluator(x, y):
            return eval_randers(a, b, x, y)

        spec = MetricSpec(name=name, dim=dim, field=FieldHandle(evaluator),
                          sample_radius=radius)
        # admissibility: |b|_a must stay below 1 on the sampling box
        for corner in _box_corners(dim, radius):
            nb = randers_norm_beta(a, b, corner)
            if not nb < RANDERS_MAX_BETA:
                raise AdmissibilityError(
                    f"|b|_a = {nb:.3f} at x={corner} exceeds the "
                    f"admissibility bound {RANDERS_MAX_BETA}")
        nb0 = randers_norm_beta(a, b, np.zeros(dim))
        if not nb0 < RANDERS_MAX_BETA:
            raise AdmissibilityError(
                f"|b|_a = {nb0:.3f} at the origin exceeds "
                f"{RANDERS_MAX_BETA}")
    return spec


def _box_corners(dim: int, radius: float):
    import itertools
    for signs in itertools.product((-radius, radius), repeat=dim):
        yield np.array(signs, dtype=float)
