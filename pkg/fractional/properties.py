"""
Invariant suites behind the ``properties`` command.

Each case checks one family of identities against closed forms or an
independent solver and reports the worst error-to-tolerance ratio it saw.
Cases run on a thread pool and are reported in case-name order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .base import DomainError, FunctionHandle
from .cauchy import CauchyProblem, solve_exact, solve_numeric
from .conformable import conformable_derivative, fractional_integral
from .matrix_semigroup import (
    AlphaSemigroup, commutation_residual, estimate_generator, matrix_exponential,
    semigroup_evaluate, semigroup_law_residual, semigroup_law_tolerance, strong_continuity_profile,
)
from .profiles import constant, cos_alpha, exp_alpha, exp_decay, gaussian, power, sin_alpha
from .transport import (
    Grid1D, TransportProblem, cfl_steps, pde_residual, solve_transport_exact,
    solve_transport_fd, translation_continuity_profile,
)

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
DEFAULT_SEED = 20260319
FAMILY_SIZE = 50
FAMILY_DIMENSIONS = (1, 2, 5)
FAMILY_MAX_NORM = 5.0
ORACLE_STRIDE = 64
LINEARITY_TOLERANCE = 1e-9

POWERS = (-0.5, 0.5, 1.0, 2.0, 3.0)
DERIVATIVE_TIMES = (0.25, 1.0, 2.5)
DERIVATIVE_ALPHAS = (0.3, 0.5, 0.9, 1.0)
SEMIGROUP_TIMES = (0.0, 0.1, 0.5, 1.0, 2.0, 4.0)
SEMIGROUP_ALPHAS = (0.25, 0.5, 0.75, 1.0)
COMMUTATION_TIMES = (0.5, 1.0, 2.0)
INTEGRAL_TIMES = (0.5, 1.0, 2.0)


def generator_family(count: int = FAMILY_SIZE, seed: int = DEFAULT_SEED,
                     dimensions: Sequence[int] = FAMILY_DIMENSIONS,
                     max_norm: float = FAMILY_MAX_NORM) -> List[np.ndarray]:
    """Seeded test generators: the 2x2 zero and nilpotent cases, then random
    matrices cycling through ``dimensions`` with ||A||_F in (0.1, max_norm]."""
    rng = np.random.default_rng(seed)
    family = [np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]])]
    while len(family) < count:
        n = dimensions[len(family) % len(dimensions)]
        raw = rng.standard_normal((n, n))
        target = rng.uniform(0.1, max_norm)
        family.append(raw * (target / np.linalg.norm(raw)))
    return family[:count]


def unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n)
    return x / np.linalg.norm(x)


@dataclass
class CaseResult:
    name: str
    passed: bool
    checks: int
    worst_ratio: float
    detail: str = ""

    def to_dict(self) -> Dict:
        record = asdict(self)
        if not math.isfinite(self.worst_ratio):
            record['worst_ratio'] = None
        return record


@dataclass
class _Tally:
    """Accumulates error / tolerance ratios; a ratio above 1 is a failure."""

    checks: int = 0
    worst: float = 0.0
    failures: List[str] = field(default_factory=list)

    def record(self, error: float, tolerance: float, label: str):
        self.checks += 1
        ratio = error / tolerance if tolerance > 0 else (0.0 if error == 0 else math.inf)
        if not ratio <= self.worst:
            self.worst = ratio if not math.isnan(ratio) else math.inf
        if not ratio <= 1.0:
            self.failures.append(f"{label}: error {error:.3g} > tolerance {tolerance:.3g}")

    def require(self, condition: bool, label: str):
        self.record(0.0 if condition else math.inf, 1.0, label)

    def result(self, name: str) -> CaseResult:
        detail = "; ".join(self.failures[:3])
        if len(self.failures) > 3:
            detail += f"; ... {len(self.failures) - 3} more"
        return CaseResult(name, not self.failures, self.checks, self.worst, detail)


@dataclass(frozen=True)
class SuiteContext:
    seed: int
    family: List[np.ndarray]

    @classmethod
    def build(cls, seed: int = DEFAULT_SEED) -> 'SuiteContext':
        return cls(seed, generator_family(seed=seed))

    def growth(self, a: np.ndarray, tau: float) -> float:
        return math.exp(float(np.linalg.norm(a)) * tau)


# ---------------------------------------------------------------------------
# Cases
# ---------------------------------------------------------------------------

def _relative_gap(value: float, exact: float) -> float:
    return abs(value - exact) / max(1.0, abs(exact))


def check_derivative_closed_forms(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    for alpha in DERIVATIVE_ALPHAS:
        for t in DERIVATIVE_TIMES:
            tau = t ** alpha / alpha
            for p in POWERS:
                value = conformable_derivative(power(p), t, alpha).value
                tally.record(_relative_gap(value, p * t ** (p - alpha)), 1e-7, f"t^{p} a={alpha} t={t}")
            fixtures = (
                (sin_alpha(alpha), math.cos(tau), "sin"),
                (cos_alpha(alpha), -math.sin(tau), "cos"),
                (exp_alpha(alpha), math.exp(tau), "exp"),
            )
            for handle, exact, label in fixtures:
                value = conformable_derivative(handle, t, alpha).value
                tally.record(_relative_gap(value, exact), 1e-7, f"{label} a={alpha} t={t}")
    return tally


def check_fractional_integral(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    for alpha in SEMIGROUP_ALPHAS:
        for t in INTEGRAL_TIMES:
            value = fractional_integral(constant(1.0), 0.0, t, alpha)
            tally.record(abs(value - t ** alpha / alpha), 1e-10, f"I(1) a={alpha} t={t}")
            for f in (exp_decay(), cos_alpha(alpha)):
                integral = FunctionHandle(
                    lambda s, f=f, alpha=alpha: fractional_integral(f, 0.0, s, alpha),
                    name=f"I[{f.label}]", vectorized=False,
                )
                recovered = conformable_derivative(integral, t, alpha).value
                tally.record(_relative_gap(recovered, float(f(t))), 1e-6, f"D I {f.label} a={alpha} t={t}")
    return tally


def check_derivative_rules(ctx: SuiteContext) -> _Tally:
    """Linearity, product, quotient, chain and constant rules at a few points."""
    tally = _Tally()
    f = exp_decay(0.7)
    g = gaussian(1.0, 0.8)
    for alpha in DERIVATIVE_ALPHAS:
        for t in DERIVATIVE_TIMES:
            df = conformable_derivative(f, t, alpha).value
            dg = conformable_derivative(g, t, alpha).value
            fv, gv = float(f(t)), float(g(t))
            combos = (
                (FunctionHandle(lambda x: 2.0 * f.func(x) - 3.0 * g.func(x)), 2.0 * df - 3.0 * dg, "linear"),
                (FunctionHandle(lambda x: f.func(x) * g.func(x)), fv * dg + gv * df, "product"),
                (FunctionHandle(lambda x: f.func(x) / g.func(x)), (gv * df - fv * dg) / gv ** 2, "quotient"),
                (FunctionHandle(lambda x: np.sin(g.func(x))), math.cos(gv) * dg, "chain"),
                (constant(4.0), 0.0, "constant"),
            )
            for handle, exact, label in combos:
                value = conformable_derivative(handle, t, alpha).value
                if label == "linear":
                    tally.record(abs(value - exact), LINEARITY_TOLERANCE, f"{label} a={alpha} t={t}")
                else:
                    tally.record(_relative_gap(value, exact), 1e-7, f"{label} a={alpha} t={t}")
    return tally


def check_semigroup_law(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    for index, a in enumerate(ctx.family):
        for alpha in SEMIGROUP_ALPHAS:
            semigroup = AlphaSemigroup(a, alpha)
            tally.require(np.array_equal(semigroup_evaluate(semigroup, 0.0), np.eye(a.shape[0])),
                          f"T(0)=I family[{index}]")
            for s in SEMIGROUP_TIMES:
                for t in SEMIGROUP_TIMES:
                    residual = semigroup_law_residual(semigroup, s, t)
                    tolerance = semigroup_law_tolerance(semigroup, s, t)
                    tally.record(residual, tolerance, f"law family[{index}] a={alpha} s={s} t={t}")
    return tally


def check_alpha_one_reduction(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    for index, a in enumerate(ctx.family):
        semigroup = AlphaSemigroup(a, 1.0)
        for t in SEMIGROUP_TIMES[1:]:
            tally.require(np.array_equal(semigroup_evaluate(semigroup, t), matrix_exponential(t * a)),
                          f"alpha=1 family[{index}] t={t}")
    return tally


def check_generator_round_trip(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    for index, a in enumerate(ctx.family):
        for alpha in SEMIGROUP_ALPHAS:
            estimate = estimate_generator(AlphaSemigroup(a, alpha))
            error = float(np.linalg.norm(estimate - a))
            tally.record(error, 1e-3 * max(1.0, float(np.linalg.norm(a))),
                         f"generator family[{index}] a={alpha}")
    return tally


def check_commutation(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    rng = np.random.default_rng(ctx.seed + 1)
    for index, a in enumerate(ctx.family):
        x = unit_vector(a.shape[0], rng)
        for alpha in SEMIGROUP_ALPHAS:
            semigroup = AlphaSemigroup(a, alpha)
            for t in COMMUTATION_TIMES:
                tolerance = 1e-5 * ctx.growth(a, t ** alpha / alpha)
                for side, residual in zip(("A T(t)x", "T(t) A x"), commutation_residual(semigroup, t, x)):
                    tally.record(residual, tolerance, f"{side} family[{index}] a={alpha} t={t}")
    return tally


def check_cauchy_oracle(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    rng = np.random.default_rng(ctx.seed + 2)
    for index, a in enumerate(ctx.family):
        u0 = unit_vector(a.shape[0], rng)
        for alpha in SEMIGROUP_ALPHAS:
            problem = CauchyProblem(a, u0, alpha, 1.0)
            numeric = solve_numeric(problem, 4096)
            exact = solve_exact(problem, numeric.times[::ORACLE_STRIDE])
            gap = float(np.max(np.abs(numeric.states[::ORACLE_STRIDE] - exact.states)))
            tally.record(gap, 1e-7 * ctx.growth(a, 1.0 / alpha), f"oracle family[{index}] a={alpha}")

    rotation = CauchyProblem([[0.0, 1.0], [-1.0, 0.0]], [1.0, 0.0], 0.5, 1.0)
    reference = solve_exact(rotation, [0.0, 1.0]).states[-1]
    coarse = np.linalg.norm(solve_numeric(rotation, 20).states[-1] - reference)
    fine = np.linalg.norm(solve_numeric(rotation, 40).states[-1] - reference)
    ratio = coarse / fine
    tally.require(12.0 <= ratio <= 20.0, f"RK4 order ratio {ratio:.3g}")

    scalar = CauchyProblem([[1.0]], [1.0], 0.5, 1.0)
    endpoint = float(solve_exact(scalar, [0.0, 1.0]).states[-1, 0])
    tally.record(abs(endpoint - math.exp(2.0)) / math.exp(2.0), 1e-10, "scalar eigensolution")
    return tally


def check_transport(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    g = exp_decay()
    problem = TransportProblem(g, 0.5, Grid1D(4.0, 401), 1.0)
    tally.record(abs(solve_transport_exact(problem, 1.0).values[0] - math.exp(-2.0)), 4e-16, "u(0,1)")

    errors = []
    for n_points in (201, 401):
        refined = TransportProblem(g, 0.5, Grid1D(4.0, n_points), 1.0)
        fd = solve_transport_fd(refined, 1.0, cfl_steps(refined, 1.0))
        errors.append(fd.max_gap(solve_transport_exact(refined, 1.0)))
    tally.record(errors[1], 5e-3, "upwind error at 401 points")
    order = math.log2(errors[0] / errors[1])
    tally.require(0.8 <= order <= 1.2, f"upwind order {order:.3g}")

    residuals = [pde_residual(TransportProblem(g, 0.6, Grid1D(2.0, n), 1.0), 1.0) for n in (201, 401)]
    tally.record(residuals[0], 1e-4, "pde residual at 201 points")
    ratio = residuals[0] / residuals[1]
    tally.require(3.0 <= ratio <= 5.0, f"pde residual refinement ratio {ratio:.3g}")
    return tally


def check_strong_continuity(ctx: SuiteContext) -> _Tally:
    tally = _Tally()
    rng = np.random.default_rng(ctx.seed + 3)
    for index, a in enumerate(ctx.family):
        norm = float(np.linalg.norm(a))
        bounded = a / norm if norm > 1.0 else a
        profile = strong_continuity_profile(AlphaSemigroup(bounded, 1.0), unit_vector(a.shape[0], rng))
        tally.require(bool(np.all(np.diff(profile) <= 0)), f"matrix monotone family[{index}]")
        tally.record(float(profile[-1]), 1e-6, f"matrix k=20 family[{index}]")

    grid = Grid1D(4.0, 401)
    for alpha in (0.5, 1.0):
        profile = translation_continuity_profile(exp_decay(), alpha, grid)
        tally.require(bool(np.all(np.diff(profile) <= 0)), f"translation monotone a={alpha}")
    tally.record(float(translation_continuity_profile(exp_decay(), 1.0, grid)[-1]), 1e-6,
                 "translation k=20 a=1")
    return tally


CASES: Dict[str, Callable[[SuiteContext], _Tally]] = {
    'alpha_one_reduction': check_alpha_one_reduction,
    'cauchy_oracle': check_cauchy_oracle,
    'commutation': check_commutation,
    'derivative_closed_forms': check_derivative_closed_forms,
    'derivative_rules': check_derivative_rules,
    'fractional_integral': check_fractional_integral,
    'generator_round_trip': check_generator_round_trip,
    'semigroup_law': check_semigroup_law,
    'strong_continuity': check_strong_continuity,
    'transport': check_transport,
}


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def run_case(name: str, ctx: SuiteContext) -> CaseResult:
    try:
        return CASES[name](ctx).result(name)
    except Exception as e:
        logger.error(f"case {name} raised {type(e).__name__}: {e}")
        return CaseResult(name, False, 0, math.inf, f"{type(e).__name__}: {e}")


def run_properties(workers: int = 4, seed: int = DEFAULT_SEED,
                   names: Optional[Iterable[str]] = None,
                   logger: Optional[logging.Logger] = None) -> List[CaseResult]:
    """Run the selected cases (all by default) and return them sorted by name."""
    logger = logger or logging.getLogger(__name__)
    selected = sorted(names) if names is not None else sorted(CASES)
    unknown = [name for name in selected if name not in CASES]
    if unknown:
        raise DomainError(f"Unknown property case(s): {', '.join(unknown)}")

    ctx = SuiteContext.build(seed)
    results = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(run_case, name, ctx): name for name in selected}
        for future in as_completed(futures):
            result = future.result()
            status = "pass" if result.passed else "FAIL"
            logger.info(f"[{status}] {result.name}: {result.checks} checks, worst ratio {result.worst_ratio:.3g}")
            results.append(result)

    results.sort(key=lambda r: r.name)
    return results
