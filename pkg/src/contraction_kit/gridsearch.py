"""Exhaustive desk-scale grid solver used to exercise reduction round-trips.

Not a general CLS solver: it scans a rational grid over [0,1]^3 (default
resolution 1/16) for each accepted solution kind in a fixed priority order
(fixed-point-style witnesses first), and checks violation clauses over a
coarser pair/triple budget.  Every returned solution is re-verified before it
is handed back, and the scan order is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .cls import (
    BanachInstance,
    CLSLocalInstance,
    ContractionMapInstance,
    ProblemInstance,
    Solution,
    verify,
)
from .library import Point, circuit_fn, l1, sq_l2


@dataclass
class GridConfig:
    resolution: Fraction = Fraction(1, 16)
    coarse_resolution: Fraction = Fraction(1, 4)
    max_pairs: int = 4000
    max_quads: int = 4000
    max_triangle_points: int = 24


def grid_points(resolution: Fraction) -> list[Point]:
    resolution = Fraction(resolution)
    if not 0 < resolution <= 1:
        raise ValueError("resolution must lie in (0, 1]")
    steps = int(1 / resolution)
    axis = [Fraction(k) * resolution for k in range(steps + 1)]
    if axis[-1] != 1:
        axis.append(Fraction(1))
    return [p for p in itertools.product(axis, repeat=3)]


def _candidate_pairs(config: GridConfig) -> list[tuple[Point, Point]]:
    coarse = grid_points(config.coarse_resolution)
    pairs: list[tuple[Point, Point]] = []
    r = config.resolution
    for pt in coarse:
        for i in range(3):
            if pt[i] + r <= 1:
                nxt = list(pt)
                nxt[i] = nxt[i] + r
                pairs.append((pt, tuple(nxt)))
    for i in range(len(coarse)):
        for j in range(i + 1, len(coarse)):
            pairs.append((coarse[i], coarse[j]))
            if len(pairs) >= config.max_pairs:
                return pairs
    return pairs


def _checked(inst: ProblemInstance, sol: Solution) -> Solution | None:
    return sol if verify(inst, sol) else None


def solve_cls_local(inst: CLSLocalInstance, config: GridConfig | None = None) -> Solution | None:
    config = config or GridConfig()
    f = circuit_fn(inst.f)
    p = circuit_fn(inst.p)
    for x in grid_points(config.resolution):
        if p(f(x)) >= p(x) - inst.eps:
            return _checked(inst, Solution("CO1", (x,)))
    pairs = _candidate_pairs(config)
    for x, y in pairs:
        if l1(f(x), f(y)) > inst.lam * l1(x, y):
            return _checked(inst, Solution("CO2", (x, y)))
    for x, y in pairs:
        if abs(p(x) - p(y)) > inst.lam * l1(x, y):
            return _checked(inst, Solution("CO3", (x, y)))
    return None


def solve_banach(inst: BanachInstance, config: GridConfig | None = None) -> Solution | None:
    config = config or GridConfig()
    f = circuit_fn(inst.f)
    d = circuit_fn(inst.d)
    for x in grid_points(config.resolution):
        if d(x, f(x)) <= inst.eps:
            return _checked(inst, Solution("Oa", (x,)))
    pairs = _candidate_pairs(config)
    cache: dict[Point, Point] = {}

    def fval(pt: Point) -> Point:
        if pt not in cache:
            cache[pt] = f(pt)
        return cache[pt]

    for x, y in pairs:
        if d(fval(x), fval(y)) > inst.c * d(x, y):
            return _checked(inst, Solution("Ob", (x, y)))
    for x, y in pairs:
        if l1(fval(x), fval(y)) > inst.lam * l1(x, y):
            return _checked(inst, Solution("Oc", (x, y)))
    quad_pairs = [(x, y) for x, y in pairs if x != y]
    dvals = {}
    for x, y in quad_pairs:
        dvals[(x, y)] = d(x, y)
    count = 0
    for x1, x2 in quad_pairs:
        for y1, y2 in quad_pairs:
            count += 1
            if count > config.max_quads:
                break
            if abs(dvals[(x1, x2)] - dvals[(y1, y2)]) > inst.lam * (l1(x1, y1) + l1(x2, y2)):
                return _checked(inst, Solution("Od", (x1, x2, y1, y2)))
        if count > config.max_quads:
            break
    if not inst.metric_promised:
        fine = grid_points(config.resolution)
        for x in fine:
            if d(x, x) != 0:
                return _checked(inst, Solution("Oe", (x,)))
        coarse = grid_points(config.coarse_resolution)[: config.max_triangle_points]
        for x, y in itertools.combinations(coarse, 2):
            if d(x, y) < 0 or d(y, x) < 0 or d(x, y) != d(y, x) or (x != y and d(x, y) == 0):
                return _checked(inst, Solution("Oe", (x, y)))
        for x, y, z in itertools.permutations(coarse, 3):
            if d(x, y) > d(x, z) + d(z, y):
                return _checked(inst, Solution("Oe", (x, y, z)))
    return None


def solve_contraction_map(
    inst: ContractionMapInstance, config: GridConfig | None = None
) -> Solution | None:
    config = config or GridConfig()
    f = circuit_fn(inst.f)
    eps_sq = inst.eps ** 2
    c_sq = inst.c ** 2
    for x in grid_points(config.resolution):
        if sq_l2(x, f(x)) <= eps_sq:
            return _checked(inst, Solution("Oa", (x,)))
    pairs = _candidate_pairs(config)
    for x, y in pairs:
        if sq_l2(f(x), f(y)) > c_sq * sq_l2(x, y):
            return _checked(inst, Solution("Ob", (x, y)))
    for x, y in pairs:
        if l1(f(x), f(y)) > inst.lam * l1(x, y):
            return _checked(inst, Solution("Oc", (x, y)))
    return None


def solve_instance(inst: ProblemInstance, config: GridConfig | None = None) -> Solution | None:
    if isinstance(inst, CLSLocalInstance):
        return solve_cls_local(inst, config)
    if isinstance(inst, BanachInstance):
        return solve_banach(inst, config)
    return solve_contraction_map(inst, config)
