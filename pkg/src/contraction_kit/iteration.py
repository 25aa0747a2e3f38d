"""Basic iterative procedure (x_{t+1} = f(x_t)) and iteration-count budgets.

run_bip works over any point type: exact rational tuples (cycle detection by
exact revisit) or float tuples (stagnation window).  The budget formulas take
d0 measured in a synthesized contraction metric; see the converse module for
how that metric is produced on finite spaces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

STAGNATION_WINDOW = 50


class StopReason(enum.Enum):
    RESIDUAL_BELOW_EPS = "residual_below_eps"
    MAX_ITERS = "max_iters"
    CYCLE_DETECTED = "cycle_detected"


class NonFiniteValueError(ArithmeticError):
    """Float-mode iterate left the finite range; carries the step index."""

    def __init__(self, step: int):
        super().__init__(f"non-finite value at step {step}")
        self.step = step


@dataclass
class IterationTrace:
    """The visited points, per-step residuals d(x_t, x_{t+1}), and stop cause."""

    points: list
    residuals: list
    stop_reason: StopReason

    @property
    def stop_index(self) -> int:
        return len(self.residuals) - 1 if self.residuals else 0

    def to_csv(self) -> str:
        lines = ["step,x1,x2,x3,residual"]
        for t, pt in enumerate(self.points):
            res = str(self.residuals[t]) if t < len(self.residuals) else ""
            coords = ",".join(str(c) for c in pt)
            lines.append(f"{t},{coords},{res}")
        return "\n".join(lines) + "\n"


def _is_exact_point(point) -> bool:
    return all(isinstance(c, (Fraction, int)) for c in point)


def run_bip(
    f: Callable,
    x0,
    d: Callable,
    eps,
    max_iters: int,
) -> IterationTrace:
    """Iterate f from x0 until the residual d(x_t, f(x_t)) drops to eps.

    Exact mode (rational points) detects cycles by exact revisit; float mode
    flags stagnation when the best residual has not improved over the last
    STAGNATION_WINDOW steps, and reports non-finite iterates with their step.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    x = tuple(x0)
    exact = _is_exact_point(x)
    if not (eps > 0):
        raise ValueError("eps must be positive")
    points = [x]
    residuals = []
    seen = {x: 0}
    best_residual = None
    best_step = 0
    for t in range(max_iters):
        nxt = tuple(f(x))
        if not exact and not all(math.isfinite(float(c)) for c in nxt):
            raise NonFiniteValueError(t + 1)
        res = d(x, nxt)
        points.append(nxt)
        residuals.append(res)
        if res <= eps:
            return IterationTrace(points, residuals, StopReason.RESIDUAL_BELOW_EPS)
        if exact:
            if nxt in seen:
                return IterationTrace(points, residuals, StopReason.CYCLE_DETECTED)
            seen[nxt] = t + 1
        else:
            if best_residual is None or res < best_residual:
                best_residual, best_step = res, t
            elif t - best_step >= STAGNATION_WINDOW:
                return IterationTrace(points, residuals, StopReason.CYCLE_DETECTED)
        x = nxt
    return IterationTrace(points, residuals, StopReason.MAX_ITERS)


@dataclass(frozen=True)
class IterationBudget:
    """Real-valued budget formula plus its integer ceiling (floored at 0)."""

    predicted_steps: float
    d0: float
    c: float
    eps: float
    delta: float | None = None

    @property
    def budget(self) -> int:
        if math.isinf(self.predicted_steps) and self.predicted_steps < 0:
            return 0
        return max(0, math.ceil(self.predicted_steps))


def _check_budget_args(d0, c, eps) -> None:
    if not 0 < c < 1:
        raise ValueError("c must lie in (0,1)")
    if d0 < 0:
        raise ValueError("d0 must be nonnegative")
    if not eps > 0:
        raise ValueError("eps must be positive")


def predict_iterations(d0, c, eps) -> IterationBudget:
    """Iteration budget (log d0 + log((2-2c)/eps)) / log(1/c).

    d0 is d_{c,eps/2}(x0, f(x0)) measured in the synthesized metric.  The
    ratio form makes the log base irrelevant.  Beware: with the (2-2c)
    factor in the numerator this budget does not force the synthesized
    distance c^n*d0/(1-c) below eps/2, so it can under-count;
    predict_iterations_sound solves that requirement.
    """
    d0, c, eps = float(d0), float(c), float(eps)
    _check_budget_args(d0, c, eps)
    if d0 == 0:
        return IterationBudget(-math.inf, d0, c, eps)
    value = (math.log(d0) + math.log((2 - 2 * c) / eps)) / math.log(1 / c)
    return IterationBudget(value, d0, c, eps)


def predict_iterations_sound(d0, c, eps) -> IterationBudget:
    """Budget solving c^n * d0 / (1-c) <= eps/2.

    After this many steps the synthesized distance from x_n to the fixed point
    is at most eps/2, which the finite construction converts to a base-metric
    guarantee d(x_n, x*) <= eps.
    """
    d0, c, eps = float(d0), float(c), float(eps)
    _check_budget_args(d0, c, eps)
    if d0 == 0:
        return IterationBudget(-math.inf, d0, c, eps)
    value = (math.log(d0) + math.log(2 / ((1 - c) * eps))) / math.log(1 / c)
    return IterationBudget(value, d0, c, eps)


def predict_iterations_local(d0, c, eps, delta, base: float = math.e) -> IterationBudget:
    """Local-contraction budget (log d0 + log(1/eps) + log(1-c) + 1)/log(1/c) + 1.

    delta is the radius of the local-contraction ball; it enters only through
    the metric in which the caller measured d0 (d_{c,delta/2}).  The bare +1
    in the numerator makes this formula base-dependent; base defaults to e,
    and the documented worked examples use base 2.
    """
    d0, c, eps = float(d0), float(c), float(eps)
    _check_budget_args(d0, c, eps)
    if not delta > 0:
        raise ValueError("delta must be positive")
    log = lambda v: math.log(v, base)
    if d0 == 0:
        return IterationBudget(-math.inf, d0, c, eps, float(delta))
    value = (log(d0) + log(1 / eps) + log(1 - c) + 1) / log(1 / c) + 1
    return IterationBudget(value, d0, c, eps, float(delta))
