"""Inter-reductions between the Banach and CLS-Local search problems.

Membership direction: a banach instance (f, d, eps, lambda, c) becomes the
cls-local instance (f, p(x) = d(x, f(x)), eps' = (1-c)*eps, lambda' = lambda);
solutions map back by a case analysis on the potential.

Hardness direction: a cls-local instance (f, p, eps, lambda) becomes a banach
instance with f' = f and the interpolated metric circuit
d(x,y) = B(kappa(x,y)) * d_S(x,y), where kappa = min(-p(x)/eps, -p(y)/eps),
d_S is the discrete metric, and B linearly mixes the bracketing powers
c^ceil(w) and c^(ceil(w)+1); the new constants are c' = 1 - 0.1*eps,
eps' = 1/c', lambda' = max(lambda, ceil(c'^(-1/eps)*lambda*ln(1/c')/eps)).
The transcendental lambda' bound is certified by interval arithmetic before
the ceiling, so it is exact and reproducible.

The optional half_eps switch runs the hardness construction at eps/2; with it
the back-mapping lands CO1 witnesses that verify at the source eps (without
it they carry the construction's inherent 2*eps slack).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import iv

from .circuit import Circuit, CircuitBuilder, CircuitError, format_fraction
from .cls import (
    BanachInstance,
    CLSLocalInstance,
    Solution,
    Verdict,
    verify_banach,
    verify_cls_local,
)
from .library import as_point, circuit_fn, l1
from .metrics import check_metric_axioms

BANACH_TO_CLSLOCAL = "banach->cls-local"
CLSLOCAL_TO_BANACH = "cls-local->banach"


class ReductionBug(AssertionError):
    """A back-mapped solution failed re-verification; carries the replay."""


def ceil_fraction(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def floor_fraction(q: Fraction) -> int:
    return q.numerator // q.denominator


def smooth_interpolation(w: Fraction, c: Fraction) -> Fraction:
    """B(w) = (1-(ceil(w)-w))*c^ceil(w) + (ceil(w)-w)*c^(ceil(w)+1), w <= 0."""
    w, c = Fraction(w), Fraction(c)
    if w > 0:
        raise ValueError("B is defined for w <= 0")
    cw = ceil_fraction(w)
    t = Fraction(cw) - w
    return (1 - t) * c ** cw + t * c ** (cw + 1)


def build_interpolation_circuit(c: Fraction, max_abs: int) -> Circuit:
    """One-input circuit computing B(w) for w in [-max_abs, 0].

    Inputs are clamped to the supported range; ceil(w) is recovered by
    peeling the binary digits of -w with gt/sub gates, and c^ceil(w) comes
    from in-circuit repeated squarings of 1/c.  O(log max_abs) gates.
    """
    c = Fraction(c)
    if not 0 < c < 1:
        raise CircuitError("c must lie in (0,1)")
    if max_abs < 1:
        raise CircuitError("max_abs must be at least 1")
    b = CircuitBuilder()
    w = b.input()
    zero = b.const(0)
    one = b.const(1)
    w_cl = b.min(b.max(w, b.const(-max_abs)), zero)
    v = b.sub(zero, w_cl)  # v = -w in [0, max_abs]
    n_bits = max_abs.bit_length()
    squares = [b.const(1 / c)]  # squares[j] = (1/c)**(2**j)
    for _ in range(1, n_bits):
        squares.append(b.mul(squares[-1], squares[-1]))
    remainder = v
    acc = one  # (1/c)**floor(v) = c**ceil(w)
    floor_v = zero
    for j in range(n_bits - 1, -1, -1):
        threshold = b.const(2 ** j)
        bit = b.sub(one, b.gt(threshold, remainder))
        remainder = b.sub(remainder, b.mul(bit, threshold))
        floor_v = b.add(floor_v, b.mul(bit, threshold))
        acc = b.mul(acc, b.add(b.mul(bit, squares[j]), b.sub(one, bit)))
    t = b.sub(v, floor_v)  # ceil(w) - w
    lower = b.mul(acc, b.const(c))  # c**(ceil(w)+1)
    value = b.add(b.mul(b.sub(one, t), acc), b.mul(t, lower))
    return b.build([value])


def build_kappa_circuit(p: Circuit, eps: Fraction) -> Circuit:
    """6-input circuit for kappa(x,y) = min(-p(x)/eps, -p(y)/eps)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise CircuitError("eps must be positive")
    b = CircuitBuilder()
    xs = b.inputs(3)
    ys = b.inputs(3)
    inv = b.const(1 / eps)
    zero = b.const(0)
    px = b.inline(p, xs)[0]
    py = b.inline(p, ys)[0]
    kx = b.sub(zero, b.mul(px, inv))
    ky = b.sub(zero, b.mul(py, inv))
    return b.build([b.min(kx, ky)])


def build_interpolated_metric_circuit(p: Circuit, eps: Fraction, c: Fraction) -> Circuit:
    """d(x,y) = B(kappa(x,y)) * d_S(x,y) as one 6-input circuit.

    Gate count is 2*|p| + O(log(1/eps)).
    """
    eps, c = Fraction(eps), Fraction(c)
    if eps <= 0:
        raise CircuitError("eps must be positive")
    if not 0 < c < 1:
        raise CircuitError("c must lie in (0,1)")
    max_abs = max(1, ceil_fraction(1 / eps))
    interp = build_interpolation_circuit(c, max_abs)
    b = CircuitBuilder()
    xs = b.inputs(3)
    ys = b.inputs(3)
    inv = b.const(1 / eps)
    zero = b.const(0)
    px = b.inline(p, xs)[0]
    py = b.inline(p, ys)[0]
    kappa = b.min(b.sub(zero, b.mul(px, inv)), b.sub(zero, b.mul(py, inv)))
    interp_val = b.inline(interp, [kappa])[0]
    flags = [b.add(b.gt(xs[i], ys[i]), b.gt(ys[i], xs[i])) for i in range(3)]
    d_s = b.gt(b.sum(flags), zero)
    return b.build([b.mul(interp_val, d_s)])


def certified_lambda_prime(lam: Fraction, eps: Fraction, c_prime: Fraction) -> Fraction:
    """max(lambda, ceil(c'^(-1/eps) * lambda * ln(1/c') / eps)) with a certified ceiling."""
    iv.prec = 128
    ci = iv.mpf(c_prime.numerator) / iv.mpf(c_prime.denominator)
    ei = iv.mpf(eps.numerator) / iv.mpf(eps.denominator)
    li = iv.mpf(lam.numerator) / iv.mpf(lam.denominator)
    log_inv = iv.log(1 / ci)
    bound = iv.exp(log_inv / ei) * li * log_inv / ei
    ceiling = Fraction(int(mpmath.ceil(bound.b)))
    return max(Fraction(lam), ceiling)


@dataclass
class ReductionArtifacts:
    direction: str
    source: CLSLocalInstance | BanachInstance
    produced: CLSLocalInstance | BanachInstance
    substitutions: dict[str, Fraction]
    half_eps: bool = False

    def provenance_text(self) -> str:
        lines = [f"direction {self.direction}"]
        if self.half_eps:
            lines.append("half-eps pre-scaling: on")
        for key in sorted(self.substitutions):
            lines.append(f"{key} {format_fraction(self.substitutions[key])}")
        return "\n".join(lines) + "\n"


def reduce_banach_to_cls_local(inst: BanachInstance) -> ReductionArtifacts:
    """Membership direction: p(x) = d(x, f(x)), eps' = (1-c)*eps, lambda' = lambda."""
    b = CircuitBuilder()
    xs = b.inputs(3)
    fx = b.inline(inst.f, xs)
    p_out = b.inline(inst.d, list(xs) + list(fx))[0]
    p = b.build([p_out])
    eps_prime = (1 - inst.c) * inst.eps
    produced = CLSLocalInstance(inst.f, p, eps_prime, inst.lam)
    subs = {"eps": inst.eps, "c": inst.c, "eps_prime": eps_prime, "lambda_prime": inst.lam}
    return ReductionArtifacts(BANACH_TO_CLSLOCAL, inst, produced, subs)


def map_cls_local_solution_to_banach(src: BanachInstance, sol: Solution) -> Solution:
    """Back-map a CO1/CO2/CO3 witness of the reduced instance to an Oa..Oe witness.

    Raises ReductionBug when the input does not verify against the reduced
    instance or the mapped solution fails verify_banach.
    """
    artifacts = reduce_banach_to_cls_local(src)
    pre = verify_cls_local(artifacts.produced, sol)
    if not pre:
        raise ReductionBug(f"solution does not verify against the reduced instance: {pre.reason}")
    f = circuit_fn(src.f)
    d = circuit_fn(src.d)
    if sol.kind == "CO1":
        (x,) = sol.witnesses
        fx = f(x)
        if d(fx, f(fx)) > src.c * d(x, fx):
            mapped = Solution("Ob", (x, fx))
        else:
            mapped = Solution("Oa", (x,))
    elif sol.kind == "CO2":
        mapped = Solution("Oc", sol.witnesses)
    else:  # CO3
        x, y = sol.witnesses
        if l1(x, f(x)) > l1(y, f(y)):
            x, y = y, x
        fx, fy = f(x), f(y)
        if x == fx:
            if d(x, fx) == 0:
                mapped = Solution("Oa", (x,))
            elif not src.metric_promised:
                mapped = Solution("Oe", (x,))
            else:
                raise ReductionBug(
                    f"d(x,x) = {d(x, fx)} != 0 at x = {x} on a promised metric"
                )
        else:
            mapped = Solution("Od", (x, fx, y, fy))
    verdict = verify_banach(src, mapped)
    if not verdict:
        raise ReductionBug(
            f"back-mapped {sol.kind} -> {mapped.kind} fails verification: "
            f"{verdict.reason} (lhs={verdict.lhs}, rhs={verdict.rhs})"
        )
    return mapped


def reduce_cls_local_to_banach(inst: CLSLocalInstance, half_eps: bool = False) -> ReductionArtifacts:
    """Hardness direction: the interpolated-metric construction."""
    eps_r = inst.eps / 2 if half_eps else inst.eps
    if eps_r >= 10:
        raise CircuitError("eps must be below 10: c' = 1 - 0.1*eps would leave (0,1)")
    c_prime = 1 - eps_r / 10
    eps_prime = 1 / c_prime
    lam_prime = certified_lambda_prime(inst.lam, eps_r, c_prime)
    d = build_interpolated_metric_circuit(inst.p, eps_r, c_prime)
    produced = BanachInstance(inst.f, d, eps_prime, lam_prime, c_prime, metric_promised=False)
    subs = {
        "eps": inst.eps,
        "eps_r": eps_r,
        "c_prime": c_prime,
        "eps_prime": eps_prime,
        "lambda_prime": lam_prime,
    }
    return ReductionArtifacts(CLSLOCAL_TO_BANACH, inst, produced, subs, half_eps=half_eps)


def map_banach_solution_to_cls_local(
    src: CLSLocalInstance, artifacts: ReductionArtifacts, sol: Solution
) -> Solution:
    """Back-map an Oa..Od witness of the constructed banach instance to CO1/CO2/CO3."""
    if artifacts.direction != CLSLOCAL_TO_BANACH:
        raise ReductionBug("artifacts are not from the hardness direction")
    pre = verify_banach(artifacts.produced, sol)
    if not pre:
        raise ReductionBug(f"solution does not verify against the reduced instance: {pre.reason}")
    p = circuit_fn(src.p)
    f = circuit_fn(src.f)
    eps_r = artifacts.substitutions["eps_r"]
    if sol.kind == "Oa":
        mapped = Solution("CO1", sol.witnesses)
    elif sol.kind == "Ob":
        x, y = sol.witnesses
        if p(f(x)) > p(x) - eps_r:
            mapped = Solution("CO1", (x,))
        elif p(f(y)) > p(y) - eps_r:
            mapped = Solution("CO1", (y,))
        else:
            # bracketing forces max(p(f(x)), p(f(y))) > max(p(x), p(y)) - 2*eps_r
            candidate = x if p(f(x)) >= p(f(y)) else y
            mapped = Solution("CO1", (candidate,))
    elif sol.kind == "Oc":
        mapped = Solution("CO2", sol.witnesses)
    elif sol.kind == "Od":
        x1, _, y1, _ = sol.witnesses
        if abs(p(x1) - p(y1)) <= src.lam * l1(x1, y1):
            raise ReductionBug(
                "Od claim refuted by replay: |p(x1)-p(y1)| <= lambda*|x1-y1|_1; "
                "the metric-circuit Lipschitz violation is not caused by p"
            )
        mapped = Solution("CO3", (x1, y1))
    else:
        raise ReductionBug(
            "verified Oe against the constructed instance: d is a metric by "
            "construction, so this indicates a bug"
        )
    verdict = verify_cls_local(src, mapped)
    if not verdict:
        raise ReductionBug(
            f"back-mapped {sol.kind} -> {mapped.kind} fails verification: "
            f"{verdict.reason} (lhs={verdict.lhs}, rhs={verdict.rhs}); "
            "hardness reductions carry 2*eps slack unless run with half_eps"
        )
    return mapped


@dataclass
class TriangleCaseVerdict:
    case: str  # "p(x)>=p(z)" or "p(x)<p(z)" after the p(x)>=p(y) normalization
    ok: bool
    lhs: Fraction
    rhs: Fraction


@dataclass
class MetricCertification:
    axiom_failures: list[str] = field(default_factory=list)
    lower_bound_failures: list[str] = field(default_factory=list)
    case_verdicts: list[TriangleCaseVerdict] = field(default_factory=list)
    min_offdiag: Fraction | None = None

    @property
    def all_pass(self) -> bool:
        return not self.axiom_failures and not self.lower_bound_failures and all(
            v.ok for v in self.case_verdicts
        )

    def report_text(self) -> str:
        lines = [f"triples checked: {len(self.case_verdicts)}"]
        if self.min_offdiag is not None:
            lines.append(f"min d(x,y) over sampled x != y: {format_fraction(self.min_offdiag)}")
        lines.append(f"axiom failures: {len(self.axiom_failures)}")
        lines.extend(f"  {msg}" for msg in self.axiom_failures)
        lines.append(f"lower-bound failures: {len(self.lower_bound_failures)}")
        lines.extend(f"  {msg}" for msg in self.lower_bound_failures)
        by_case: dict[str, list[TriangleCaseVerdict]] = {}
        for v in self.case_verdicts:
            by_case.setdefault(v.case, []).append(v)
        for case, verdicts in sorted(by_case.items()):
            ok = sum(1 for v in verdicts if v.ok)
            lines.append(f"triangle case {case}: {ok}/{len(verdicts)} hold")
        lines.append("overall: " + ("PASS" if self.all_pass else "FAIL"))
        return "\n".join(lines) + "\n"


def certify_constructed_metric(
    artifacts: ReductionArtifacts, triples: Sequence[Sequence[Sequence[Fraction]]]
) -> MetricCertification:
    """Check metric axioms, the d >= c' lower bound, and the two-case triangle
    argument of the constructed metric over sampled triples."""
    if artifacts.direction != CLSLOCAL_TO_BANACH:
        raise ReductionBug("artifacts are not from the hardness direction")
    inst = artifacts.produced
    d = circuit_fn(inst.d)
    p = circuit_fn(artifacts.source.p)
    c_prime = artifacts.substitutions["c_prime"]
    report = MetricCertification()
    for raw in triples:
        triple = tuple(as_point(pt) for pt in raw)
        violation = check_metric_axioms(inst.d, triple)
        if violation is not None:
            report.axiom_failures.append(
                f"{violation.axiom} at {violation.witnesses}: "
                f"lhs={violation.lhs} rhs={violation.rhs}"
            )
        for a in triple:
            for bpt in triple:
                if a != bpt:
                    val = d(a, bpt)
                    if report.min_offdiag is None or val < report.min_offdiag:
                        report.min_offdiag = val
                    if val < c_prime:
                        report.lower_bound_failures.append(
                            f"d({a},{bpt}) = {val} < c' = {c_prime}"
                        )
        x, y, z = triple
        if p(x) < p(y):
            x, y = y, x
        case = "p(x)>=p(z)" if p(x) >= p(z) else "p(x)<p(z)"
        lhs = d(x, y)
        rhs = d(x, z) + d(z, y)
        report.case_verdicts.append(TriangleCaseVerdict(case, lhs <= rhs, lhs, rhs))
    return report
