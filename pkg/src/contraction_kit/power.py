"""Power iteration, the eigen-metric it contracts under, and its certificates.

The metric d(x,y) = || x/<x,v1> - y/<y,v1> ||_2 contracts at rate
lambda2/lambda1 under the normalized power step for symmetric matrices with a
simple principal eigenvalue (symmetry makes left and right eigenvectors
coincide and gives ||A z||_2 <= lambda2 ||z||_2 on the complement of v1).
Main arithmetic is float64; certificates can be replayed through a 128-bit
mpmath oracle.

Matrix file format: a dimension line, then one row of decimal reals per line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from mpmath import mp, mpf, sqrt as mp_sqrt

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10
GAP_MIN = 1e-8
UNIT_TOL = 1e-12
OVERLAP_MIN = 1e-10
RATE_SLACK = 1e-9
JACOBI_TARGET = 1e-14
MAX_DIMENSION = 64
REPLAY_PRECISION = 128


class SpectralError(ValueError):
    """Matrix or vector fails a module precondition."""


@dataclass
class SpectralSystem:
    """Symmetric matrix with validated, descending eigenpairs (v_i as rows)."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.matrix, dtype=float)
        lam = np.asarray(self.eigenvalues, dtype=float)
        vec = np.asarray(self.eigenvectors, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n) or lam.shape != (n,) or vec.shape != (n, n):
            raise SpectralError("inconsistent shapes")
        if n > MAX_DIMENSION:
            raise SpectralError(f"dimension {n} exceeds {MAX_DIMENSION}")
        if not np.allclose(a, a.T, atol=1e-12, rtol=0):
            raise SpectralError("matrix is not symmetric")
        if np.any(np.diff(lam) > 0):
            raise SpectralError("eigenvalues must be sorted descending")
        if lam[0] - lam[1] < GAP_MIN:
            raise SpectralError(f"gap too small for the eigen-metric: {lam[0] - lam[1]:.3e}")
        gram = vec @ vec.T
        if np.max(np.abs(gram - np.eye(n))) > ORTHO_TOL:
            raise SpectralError("eigenvectors are not orthonormal")
        for i in range(n):
            res = np.linalg.norm(a @ vec[i] - lam[i] * vec[i])
            if res > RESIDUAL_TOL:
                raise SpectralError(f"eigenpair {i} residual {res:.3e} exceeds {RESIDUAL_TOL}")
        self.matrix, self.eigenvalues, self.eigenvectors = a, lam, vec

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def v1(self) -> np.ndarray:
        return self.eigenvectors[0]

    @property
    def rate(self) -> float:
        """Contraction constant lambda2/lambda1 of the eigen-metric."""
        return self.eigenvalues[1] / self.eigenvalues[0]


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def jacobi_eigensolve(a: Sequence[Sequence[float]]) -> SpectralSystem:
    """Cyclic Jacobi sweeps until the off-diagonal Frobenius mass is < 1e-14."""
    a0 = np.asarray(a, dtype=float)
    n = a0.shape[0]
    if a0.shape != (n, n):
        raise SpectralError("matrix must be square")
    if n > MAX_DIMENSION:
        raise SpectralError(f"dimension {n} exceeds {MAX_DIMENSION}")
    if not np.allclose(a0, a0.T, atol=1e-12, rtol=0):
        raise SpectralError("matrix is not symmetric")
    work = a0.copy()
    vecs = np.eye(n)
    for _ in range(100):
        # Frobenius mass of the off-diagonal part, taken entrywise: the
        # total-minus-diagonal form cancels catastrophically near convergence
        off = float(np.linalg.norm(work - np.diag(np.diag(work))))
        if off < JACOBI_TARGET:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) < JACOBI_TARGET / max(1, n * n):
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                work = rot.T @ work @ rot
                vecs = vecs @ rot
    else:
        raise SpectralError("Jacobi sweeps did not reach the off-diagonal target")
    lam = np.diag(work).copy()
    order = np.argsort(-lam)
    lam = lam[order]
    rows = np.array([_fix_sign(vecs[:, i]) for i in order])
    if lam[0] - lam[1] < GAP_MIN:
        raise SpectralError(f"gap too small for the eigen-metric: {lam[0] - lam[1]:.3e}")
    return SpectralSystem(a0, lam, rows)


def power_step(sys: SpectralSystem, x: Sequence[float]) -> np.ndarray:
    """One normalized iteration A x / ||A x||_2, sign-aligned to <., v1> > 0."""
    xv = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(xv) - 1.0) > UNIT_TOL:
        raise SpectralError("power_step expects a unit vector")
    if abs(float(xv @ sys.v1)) < OVERLAP_MIN:
        raise SpectralError("starting vector is perpendicular to the principal eigenvector")
    ax = sys.matrix @ xv
    norm = np.linalg.norm(ax)
    if norm == 0.0:
        raise SpectralError("A x vanished; x lies in the kernel")
    out = ax / norm
    if float(out @ sys.v1) < 0:
        out = -out
    return out


@dataclass
class EigenMetricValue:
    """d(x,y) with the v1-normalized points and their difference kept for audit."""

    value: float
    normalized_x: np.ndarray
    normalized_y: np.ndarray
    residual: np.ndarray

    def orthogonality_defect(self, sys: SpectralSystem) -> float:
        return abs(float(self.residual @ sys.v1))


def eigen_metric(sys: SpectralSystem, x: Sequence[float], y: Sequence[float]) -> EigenMetricValue:
    """d(x,y) = || x/<x,v1> - y/<y,v1> ||_2; undefined near <.,v1> = 0."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    ox = float(xv @ sys.v1)
    oy = float(yv @ sys.v1)
    if abs(ox) < OVERLAP_MIN or abs(oy) < OVERLAP_MIN:
        raise SpectralError("metric undefined: vector nearly perpendicular to v1")
    nx = xv / ox
    ny = yv / oy
    residual = nx - ny
    return EigenMetricValue(float(np.linalg.norm(residual)), nx, ny, residual)


@dataclass
class RatePair:
    index: int
    d_before: float
    d_after: float

    @property
    def ratio(self) -> float | None:
        if self.d_before == 0.0:
            return None  # vacuous: both points normalize onto v1
        return self.d_after / self.d_before


@dataclass
class RateCertificate:
    rate_bound: float
    pairs: list[RatePair] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        ratios = [p.ratio for p in self.pairs if p.ratio is not None]
        return max(ratios) if ratios else 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        lines = ["pair,d_before,d_after,ratio"]
        for p in self.pairs:
            ratio = "" if p.ratio is None else repr(p.ratio)
            lines.append(f"{p.index},{p.d_before!r},{p.d_after!r},{ratio}")
        return "\n".join(lines) + "\n"


def certify_contraction_rate(
    sys: SpectralSystem, pairs: Sequence[tuple[Sequence[float], Sequence[float]]]
) -> RateCertificate:
    """Check d(f(x), f(y)) <= (lambda2/lambda1) d(x,y) + 1e-9 for every pair."""
    cert = RateCertificate(rate_bound=sys.rate)
    for idx, (x, y) in enumerate(pairs):
        before = eigen_metric(sys, x, y).value
        after = eigen_metric(sys, power_step(sys, x), power_step(sys, y)).value
        cert.pairs.append(RatePair(idx, before, after))
        if after > sys.rate * before + RATE_SLACK:
            cert.violations.append(idx)
    return cert


def replay_pair_mp(
    sys: SpectralSystem, x: Sequence[float], y: Sequence[float], precision: int = REPLAY_PRECISION
) -> tuple[float, float]:
    """(d(x,y), d(f(x),f(y))) recomputed from the same floats at high precision."""
    old = mp.prec
    mp.prec = precision
    try:
        a = [[mpf(v) for v in row] for row in sys.matrix]
        v1 = [mpf(v) for v in sys.v1]
        n = len(v1)

        def dot(u, w):
            return sum((u[i] * w[i] for i in range(n)), mpf(0))

        def matvec(u):
            return [dot(row, u) for row in a]

        def norm(u):
            return mp_sqrt(dot(u, u))

        def metric(u, w):
            nu = dot(u, v1)
            nw = dot(w, v1)
            return norm([u[i] / nu - w[i] / nw for i in range(n)])

        xs = [mpf(v) for v in x]
        ys = [mpf(v) for v in y]
        before = metric(xs, ys)
        ax, ay = matvec(xs), matvec(ys)
        fx = [v / norm(ax) for v in ax]
        fy = [v / norm(ay) for v in ay]
        after = metric(fx, fy)
        return float(before), float(after)
    finally:
        mp.prec = old


PAPER_PAIR_X = (1.0 / math.sqrt(5.0), 2.0 / math.sqrt(5.0))
PAPER_PAIR_Y = (1.0 / math.sqrt(10.0), 3.0 / math.sqrt(10.0))


def paper_counterexample_system() -> SpectralSystem:
    return SpectralSystem(
        np.diag([2.0, 1.0]), np.array([2.0, 1.0]), np.eye(2)
    )


@dataclass
class LpCounterexample:
    p: float
    x: tuple[float, ...]
    y: tuple[float, ...]
    d_before: float
    d_after: float

    @property
    def expanding(self) -> bool:
        return self.d_after > self.d_before

    @property
    def ratio(self) -> float:
        return self.d_after / self.d_before


def lp_counterexample(p: float) -> LpCounterexample:
    """Expansion witness for the normalized power step of diag(2,1) in l_p.

    p = 2 reproduces the documented pair; p in {1, inf} scans a 1e-2 grid on
    the simplex of 2-vectors (l2-normalized) and returns the first expanding
    pair found.
    """
    sys = paper_counterexample_system()

    def norm_p(v: np.ndarray) -> float:
        return float(np.linalg.norm(v, ord=(np.inf if p == math.inf else p)))

    def step(v: np.ndarray) -> np.ndarray:
        return power_step(sys, v)

    if p == 2:
        x = np.array(PAPER_PAIR_X)
        y = np.array(PAPER_PAIR_Y)
        return LpCounterexample(
            2, tuple(x), tuple(y), norm_p(x - y), norm_p(step(x) - step(y))
        )
    if p not in (1, math.inf):
        raise SpectralError("supported norms: p in {1, 2, inf}")
    grid = []
    for k in range(101):
        t = k / 100.0
        v = np.array([t, 1.0 - t])
        n = np.linalg.norm(v)
        if n == 0.0:
            continue
        v = v / n
        if abs(v[0]) >= OVERLAP_MIN:
            grid.append(v)
    for i in range(len(grid)):
        for j in range(i + 1, len(grid)):
            x, y = grid[i], grid[j]
            before = norm_p(x - y)
            if before == 0.0:
                continue
            after = norm_p(step(x) - step(y))
            if after > before:
                return LpCounterexample(p, tuple(x), tuple(y), before, after)
    raise SpectralError(f"no expanding pair found on the grid for p={p}")


@dataclass
class IterationBoundReport:
    predicted: int
    distances: list[float]          # d(x_t, v1) for t = 0..predicted
    final_distance: float
    final_l2_error: float
    eps: float

    @property
    def ok(self) -> bool:
        slack = 1e-12  # float-noise allowance at exact-equality boundaries
        return self.final_distance <= self.eps + slack and self.final_l2_error <= self.eps + slack


def iteration_bound(sys: SpectralSystem, x0: Sequence[float], eps: float) -> IterationBoundReport:
    """Predicted step count log(d(x0,v1)/eps)/log(lambda1/lambda2), then verify.

    Runs the predicted number of steps and confirms both d(x_t, v1) <= eps and
    ||x_t - v1||_2 <= eps (the d-to-l2 conversion).
    """
    if eps <= 0:
        raise SpectralError("eps must be positive")
    x = np.asarray(x0, dtype=float)
    d0 = eigen_metric(sys, x, sys.v1).value
    if d0 <= eps:
        predicted = 0
    else:
        predicted = math.ceil(math.log(d0 / eps) / math.log(1.0 / sys.rate))
    distances = [d0]
    for _ in range(predicted):
        x = power_step(sys, x)
        distances.append(eigen_metric(sys, x, sys.v1).value)
    final_l2 = float(np.linalg.norm(x - sys.v1))
    return IterationBoundReport(predicted, distances, distances[-1], final_l2, float(eps))


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise SpectralError("empty matrix file")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise SpectralError(f"expected {n} rows, got {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        row = [float(tok) for tok in ln.split()]
        if len(row) != n:
            raise SpectralError(f"row has {len(row)} entries, expected {n}")
        rows.append(row)
    return np.array(rows)


def format_matrix(a: np.ndarray) -> str:
    n = a.shape[0]
    lines = [str(n)]
    for row in a:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
