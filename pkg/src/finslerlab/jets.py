"""Truncated multivariate Taylor expansions (jets) over a chart.

A jet stores the Taylor coefficients of a scalar field of (x, y) around a base
point, with independent truncation orders for the x-slots and the y-slots.
Coefficients are kept in a dense vector indexed by graded-lex rank, which keeps
the contraction-heavy tensor work free of hash lookups.  All arithmetic is
closed on a fixed `JetSpace`; mixing jets of different orders silently
truncates to the common order.

The actual coefficient products run through `_kernel` (compiled extension or
NumPy fallback).
"""

from __future__ import annotations

import itertools
import math
import numbers
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernel


class JetDomainError(ArithmeticError):
    """Raised for sqrt/division/power on a jet whose constant term forbids it."""


class EvaluationError(ValueError):
    """Raised when a field evaluates to a non-finite value during a lift."""


def _multi_indices(nvars: int, max_order: int) -> list[tuple[int, ...]]:
    """All multi-indices with total order <= max_order, graded-lex order."""
    out = []
    for total in range(max_order + 1):
        for comb in itertools.combinations_with_replacement(range(nvars), total):
            alpha = [0] * nvars
            for v in comb:
                alpha[v] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement is lex in the variable tuple; dedupe is not
    # needed since each alpha appears once per total order.
    return out


def _pair_table(indices, rank, max_order):
    ii, jj, kk = [], [], []
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            s = tuple(p + q for p, q in zip(a, b))
            if sum(s) <= max_order:
                ii.append(i)
                jj.append(j)
                kk.append(rank[s])
    return np.asarray(ii), np.asarray(jj), np.asarray(kk)


class JetSpace:
    """Shared immutable tables for all jets of one (n, order_x, order_y)."""

    def __init__(self, n: int, order_x: int, order_y: int):
        if n < 1 or order_x < 0 or order_y < 0:
            raise ValueError("invalid jet space parameters")
        self.n = n
        self.order_x = order_x
        self.order_y = order_y
        self.x_indices = _multi_indices(n, order_x)
        self.y_indices = _multi_indices(n, order_y)
        self.x_rank = {a: r for r, a in enumerate(self.x_indices)}
        self.y_rank = {b: r for r, b in enumerate(self.y_indices)}
        self.mx = len(self.x_indices)
        self.my = len(self.y_indices)
        self.size = self.mx * self.my
        self.max_total = order_x + order_y
        fact = np.empty(self.size)
        for rx, a in enumerate(self.x_indices):
            fa = math.prod(math.factorial(k) for k in a)
            for ry, b in enumerate(self.y_indices):
                fb = math.prod(math.factorial(k) for k in b)
                fact[rx * self.my + ry] = fa * fb
        self.fact = fact
        self._mul_tables = None
        self._deriv_tables: dict = {}
        self._trunc_sel: dict = {}

    def index(self, alpha: tuple[int, ...], beta: tuple[int, ...]) -> int:
        return self.x_rank[tuple(alpha)] * self.my + self.y_rank[tuple(beta)]

    @property
    def mul_tables(self):
        if self._mul_tables is None:
            xi, xj, xk = _pair_table(self.x_indices, self.x_rank, self.order_x)
            yi, yj, yk = _pair_table(self.y_indices, self.y_rank, self.order_y)
            ti = (xi[:, None] * self.my + yi[None, :]).ravel()
            tj = (xj[:, None] * self.my + yj[None, :]).ravel()
            tk = (xk[:, None] * self.my + yk[None, :]).ravel()
            self._mul_tables = (
                np.ascontiguousarray(ti, dtype=np.int32),
                np.ascontiguousarray(tj, dtype=np.int32),
                np.ascontiguousarray(tk, dtype=np.int32),
            )
        return self._mul_tables

    def deriv_table(self, slot: str, var: int):
        """Index map realizing d/dx^var (slot 'x') or d/dy^var (slot 'y')."""
        key = (slot, var)
        if key not in self._deriv_tables:
            if slot == "x":
                target = jet_space(self.n, self.order_x - 1, self.order_y)
            else:
                target = jet_space(self.n, self.order_x, self.order_y - 1)
            src, dst, fac = [], [], []
            for rx, a in enumerate(target.x_indices):
                for ry, b in enumerate(target.y_indices):
                    if slot == "x":
                        a_src = list(a)
                        a_src[var] += 1
                        s = self.index(tuple(a_src), b)
                        f = a[var] + 1
                    else:
                        b_src = list(b)
                        b_src[var] += 1
                        s = self.index(a, tuple(b_src))
                        f = b[var] + 1
                    src.append(s)
                    dst.append(rx * target.my + ry)
                    fac.append(f)
            self._deriv_tables[key] = (
                np.asarray(src), np.asarray(dst), np.asarray(fac, dtype=float),
                target,
            )
        return self._deriv_tables[key]

    def trunc_sel(self, order_x: int, order_y: int):
        key = (order_x, order_y)
        if key not in self._trunc_sel:
            target = jet_space(self.n, order_x, order_y)
            sel = np.empty(target.size, dtype=np.intp)
            for rx, a in enumerate(target.x_indices):
                for ry, b in enumerate(target.y_indices):
                    sel[rx * target.my + ry] = self.index(a, b)
            self._trunc_sel[key] = (sel, target)
        return self._trunc_sel[key]


@lru_cache(maxsize=None)
def jet_space(n: int, order_x: int, order_y: int) -> JetSpace:
    return JetSpace(n, order_x, order_y)


class Jet:
    """Immutable truncated Taylor expansion; supports +, -, *, /, ** and sqrt."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(space: JetSpace, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        return Jet(space, c)

    @staticmethod
    def variable(space: JetSpace, slot: str, var: int, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = value
        e = tuple(1 if i == var else 0 for i in range(space.n))
        zero = (0,) * space.n
        if slot == "x":
            if space.order_x >= 1:
                c[space.index(e, zero)] = 1.0
        elif slot == "y":
            if space.order_y >= 1:
                c[space.index(zero, e)] = 1.0
        else:
            raise ValueError(f"unknown slot {slot!r}")
        return Jet(space, c)

    # -- basic access -------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, alpha=(), beta=()) -> float:
        """Taylor coefficient of the given (x, y) multi-index."""
        a = _as_multi(alpha, self.space.n)
        b = _as_multi(beta, self.space.n)
        return float(self.coeffs[self.space.index(a, b)])

    def deriv_value(self, alpha=(), beta=()) -> float:
        """Partial derivative value (coefficient times multi-index factorials)."""
        a = _as_multi(alpha, self.space.n)
        b = _as_multi(beta, self.space.n)
        i = self.space.index(a, b)
        return float(self.coeffs[i] * self.space.fact[i])

    def truncated(self, order_x: int, order_y: int) -> "Jet":
        if order_x == self.space.order_x and order_y == self.space.order_y:
            return self
        if order_x > self.space.order_x or order_y > self.space.order_y:
            raise ValueError("cannot extend a jet to higher order")
        sel, target = self.space.trunc_sel(order_x, order_y)
        return Jet(target, self.coeffs[sel])

    # -- derivatives --------------------------------------------------------

    def dx(self, var: int) -> "Jet":
        """Jet of the x^var partial derivative (order_x drops by one)."""
        src, dst, fac, target = self.space.deriv_table("x", var)
        c = np.zeros(target.size)
        c[dst] = self.coeffs[src] * fac
        return Jet(target, c)

    def dy(self, var: int) -> "Jet":
        """Jet of the y^var partial derivative (order_y drops by one)."""
        src, dst, fac, target = self.space.deriv_table("y", var)
        c = np.zeros(target.size)
        c[dst] = self.coeffs[src] * fac
        return Jet(target, c)

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other: "Jet"):
        if self.space is other.space:
            return self, other
        ox = min(self.space.order_x, other.space.order_x)
        oy = min(self.space.order_y, other.space.order_y)
        return self.truncated(ox, oy), other.truncated(ox, oy)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._aligned(other)
            return Jet(a.space, a.coeffs + b.coeffs)
        if isinstance(other, numbers.Real):
            c = self.coeffs.copy()
            c[0] += other
            return Jet(self.space, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._aligned(other)
            return Jet(a.space, a.coeffs - b.coeffs)
        if isinstance(other, numbers.Real):
            c = self.coeffs.copy()
            c[0] -= other
            return Jet(self.space, c)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._aligned(other)
            ti, tj, tk = a.space.mul_tables
            return Jet(a.space, _kernel.multiply(a.coeffs, b.coeffs,
                                                 ti, tj, tk, a.space.size))
        if isinstance(other, numbers.Real):
            return Jet(self.space, self.coeffs * float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if isinstance(other, numbers.Real):
            return Jet(self.space, self.coeffs / float(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Real):
            return self.reciprocal() * float(other)
        return NotImplemented

    def __pow__(self, p):
        if isinstance(p, numbers.Integral) or (
                isinstance(p, float) and p.is_integer()):
            p = int(p)
            if p == 0:
                return Jet.constant(self.space, 1.0)
            if p < 0:
                return self.reciprocal() ** (-p)
            result = None
            base = self
            while p:
                if p & 1:
                    result = base if result is None else result * base
                p >>= 1
                if p:
                    base = base * base
            return result
        if isinstance(p, numbers.Real):
            return self._binomial_series(float(p))
        return NotImplemented

    def reciprocal(self) -> "Jet":
        if self.coeffs[0] == 0.0:
            raise JetDomainError("division by a jet with zero constant term")
        return self._binomial_series(-1.0, allow_negative=True)

    def sqrt(self) -> "Jet":
        if self.coeffs[0] <= 0.0:
            raise JetDomainError("sqrt of a jet with non-positive constant term")
        return self._binomial_series(0.5)

    def _binomial_series(self, p: float, allow_negative: bool = False) -> "Jet":
        """(c0 + t)^p = c0^p * sum_k binom(p, k) (t/c0)^k, exact at truncation."""
        c0 = float(self.coeffs[0])
        if c0 <= 0.0 and not allow_negative:
            raise JetDomainError(
                f"jet power {p} requires a positive constant term, got {c0}")
        u = self.coeffs / c0
        u = u.copy()
        u[0] = 0.0
        depth = self.space.max_total
        coef = np.empty(depth + 1)
        coef[0] = 1.0
        for k in range(depth):
            coef[k + 1] = coef[k] * (p - k) / (k + 1)
        ti, tj, tk = self.space.mul_tables
        out = _kernel.fused_series(u, coef, ti, tj, tk, self.space.size)
        return Jet(self.space, out * c0 ** p)

    def __repr__(self):
        s = self.space
        return (f"Jet(n={s.n}, order_x={s.order_x}, order_y={s.order_y}, "
                f"value={self.value:.6g})")


def _as_multi(m, n: int) -> tuple[int, ...]:
    if isinstance(m, numbers.Integral):
        # variable number shorthand: a single first-order index
        return tuple(1 if i == m else 0 for i in range(n))
    m = tuple(int(v) for v in m)
    if not m:
        return (0,) * n
    if len(m) != n:
        raise ValueError(f"multi-index length {len(m)} != dimension {n}")
    return m


@dataclass(frozen=True)
class FieldHandle:
    """Black-box scalar field (x, y) -> value, smooth on its declared domain.

    The evaluator must be generic: it receives sequences of scalar-likes
    (floats, NumPy arrays, or jets) and combines them with ordinary arithmetic
    plus the helpers in `smath`.
    """

    evaluator: Callable[[Sequence, Sequence], object]
    domain: Callable[[np.ndarray], bool] = field(default=lambda x: True)

    def __call__(self, x, y):
        return self.evaluator(x, y)


def lift(fieldh: FieldHandle, at, order_x: int, order_y: int) -> Jet:
    """Truncated Taylor expansion of a field around the point `at` = (x, y)."""
    x, y = (at.x, at.y) if hasattr(at, "x") else at
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if not fieldh.domain(x):
        raise EvaluationError(f"point {x} outside the field domain")
    space = jet_space(n, order_x, order_y)
    xs = [Jet.variable(space, "x", i, x[i]) for i in range(n)]
    ys = [Jet.variable(space, "y", i, y[i]) for i in range(n)]
    out = fieldh(xs, ys)
    if not isinstance(out, Jet):
        out = Jet.constant(space, float(out))
    if not np.all(np.isfinite(out.coeffs)):
        raise EvaluationError(
            f"non-finite field evaluation at x={x}, y={y}")
    return out
