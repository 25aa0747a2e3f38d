"""Exact deciders for metric axioms, Lipschitz continuity, and contraction.

All checks are over caller-supplied finite point sets and decide strict
inequalities exactly on rationals; no epsilon slack is ever added.  Returned
violations carry the witnesses and both sides of the failed inequality so
they replay bit-for-bit through re-evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .circuit import Circuit
from .library import Point, as_point, circuit_fn, l1

AXIOM_NONNEG = "NONNEG"
AXIOM_IDENTITY = "IDENTITY"
AXIOM_SYMMETRY = "SYMMETRY"
AXIOM_TRIANGLE = "TRIANGLE"

DistanceFn = Callable[[Sequence[Fraction], Sequence[Fraction]], Fraction]


@dataclass(frozen=True)
class MetricViolation:
    """A failed metric axiom with the witnessing points and both sides."""

    axiom: str
    witnesses: tuple[Point, ...]
    lhs: Fraction
    rhs: Fraction

    def replay(self, d: DistanceFn) -> bool:
        """Re-derive the violation from scratch; True iff it still holds."""
        w = self.witnesses
        if self.axiom == AXIOM_NONNEG:
            return d(w[0], w[1]) < 0
        if self.axiom == AXIOM_IDENTITY:
            if len(w) == 1:
                return d(w[0], w[0]) != 0
            return w[0] != w[1] and d(w[0], w[1]) == 0
        if self.axiom == AXIOM_SYMMETRY:
            return d(w[0], w[1]) != d(w[1], w[0])
        if self.axiom == AXIOM_TRIANGLE:
            return d(w[0], w[1]) > d(w[0], w[2]) + d(w[2], w[1])
        raise ValueError(f"unknown axiom {self.axiom!r}")


@dataclass(frozen=True)
class PointPair:
    x: Point
    y: Point

    def __post_init__(self):
        object.__setattr__(self, "x", as_point(self.x))
        object.__setattr__(self, "y", as_point(self.y))


def _as_distance(d) -> DistanceFn:
    if isinstance(d, Circuit):
        if d.input_arity != 6 or d.output_arity != 1:
            raise ValueError("distance circuit must map 6 inputs to 1 output")
        return circuit_fn(d)
    return d


def check_metric_axioms(d, points: Sequence[Sequence[Fraction]]) -> MetricViolation | None:
    """First metric-axiom violation of d over the point set, or None.

    Axioms are scanned in the order nonnegativity, identity of indiscernibles,
    symmetry, triangle inequality; within each axiom the witness tuples run in
    lexicographic index order, so the result is deterministic.
    """
    raw = _as_distance(d)
    pts = [as_point(p) for p in points]
    n = len(pts)
    cache: dict[tuple[int, int], Fraction] = {}

    def dist(i: int, j: int) -> Fraction:
        if (i, j) not in cache:
            cache[(i, j)] = raw(pts[i], pts[j])
        return cache[(i, j)]

    for i in range(n):
        for j in range(n):
            val = dist(i, j)
            if val < 0:
                return MetricViolation(AXIOM_NONNEG, (pts[i], pts[j]), val, Fraction(0))
    for i in range(n):
        val = dist(i, i)
        if val != 0:
            return MetricViolation(AXIOM_IDENTITY, (pts[i],), val, Fraction(0))
    for i in range(n):
        for j in range(n):
            if i != j and pts[i] != pts[j] and dist(i, j) == 0:
                return MetricViolation(AXIOM_IDENTITY, (pts[i], pts[j]), Fraction(0), Fraction(0))
    for i in range(n):
        for j in range(i + 1, n):
            if dist(i, j) != dist(j, i):
                return MetricViolation(AXIOM_SYMMETRY, (pts[i], pts[j]), dist(i, j), dist(j, i))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j or j == k or i == k:
                    continue
                lhs = dist(i, j)
                rhs = dist(i, k) + dist(k, j)
                if lhs > rhs:
                    return MetricViolation(AXIOM_TRIANGLE, (pts[i], pts[j], pts[k]), lhs, rhs)
    return None


@dataclass(frozen=True)
class LipschitzViolation:
    pair: PointPair
    lhs: Fraction  # |g(x) - g(y)|_1
    rhs: Fraction  # lam * |x - y|_1


def find_lipschitz_violation(
    g, lam: Fraction, pairs: Sequence[PointPair]
) -> LipschitzViolation | None:
    """First pair violating lambda-Lipschitz continuity of g in the l1 norm."""
    lam = Fraction(lam)
    if isinstance(g, Circuit):
        fn = circuit_fn(g)
    else:
        fn = g
    for pair in pairs:
        gx = fn(pair.x)
        gy = fn(pair.y)
        if isinstance(gx, Fraction):
            gx, gy = (gx,), (gy,)
        lhs = sum((abs(a - b) for a, b in zip(gx, gy)), Fraction(0))
        rhs = lam * l1(pair.x, pair.y)
        if lhs > rhs:
            return LipschitzViolation(pair, lhs, rhs)
    return None


@dataclass(frozen=True)
class ContractionViolation:
    pair: PointPair
    lhs: Fraction  # d(f(x), f(y))
    rhs: Fraction  # c * d(x, y)


def find_contraction_violation(
    f, d, c: Fraction, pairs: Sequence[PointPair]
) -> ContractionViolation | None:
    """First pair with d(f(x), f(y)) > c * d(x, y), decided exactly.

    c = 1 is admitted so non-expansion can be refuted (the power-iteration
    counterexample needs it); contraction proper means c < 1.
    """
    c = Fraction(c)
    if not 0 < c <= 1:
        raise ValueError("contraction constant must lie in (0,1]")
    fn = circuit_fn(f) if isinstance(f, Circuit) else f
    dist = _as_distance(d)
    for pair in pairs:
        fx = fn(pair.x)
        fy = fn(pair.y)
        lhs = dist(fx, fy)
        rhs = c * dist(pair.x, pair.y)
        if lhs > rhs:
            return ContractionViolation(pair, lhs, rhs)
    return None


def check_metric_matrix(dist: Sequence[Sequence[Fraction]]) -> str | None:
    """Exhaustive metric-axiom check for a square distance matrix.

    Returns None on pass or a short description of the first failure; used to
    vet finite-space base metrics and synthesized matrices.
    """
    n = len(dist)
    for i in range(n):
        if len(dist[i]) != n:
            return f"row {i} has length {len(dist[i])}, expected {n}"
    for i in range(n):
        if dist[i][i] != 0:
            return f"IDENTITY: d({i},{i}) = {dist[i][i]} != 0"
        for j in range(n):
            if dist[i][j] < 0:
                return f"NONNEG: d({i},{j}) = {dist[i][j]} < 0"
            if i != j and dist[i][j] == 0:
                return f"IDENTITY: d({i},{j}) = 0 for distinct indices"
            if dist[i][j] != dist[j][i]:
                return f"SYMMETRY: d({i},{j}) != d({j},{i})"
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i != j and j != k and i != k and dist[i][j] > dist[i][k] + dist[k][j]:
                    return (
                        f"TRIANGLE: d({i},{j}) = {dist[i][j]} > "
                        f"d({i},{k}) + d({k},{j}) = {dist[i][k] + dist[k][j]}"
                    )
    return None
