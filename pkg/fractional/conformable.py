"""
Conformable fractional derivative and integral.

The derivative of order alpha in (0, 1] is

    T_alpha(f)(t) = lim_{eps -> 0} (f(t + eps * t^(1-alpha)) - f(t)) / eps
                  = t^(1-alpha) * f'(t)            (f differentiable, t > 0)

and is computed here from the second form with central differences and one
Richardson level. The alpha-integral starting at a >= 0 is

    I_alpha^a(f)(t) = integral_a^t f(x) * x^(alpha-1) dx

evaluated after the substitution u = x^alpha, which removes the endpoint
singularity at x = 0.
"""

import logging
import math
from typing import Callable, List, Sequence, Union

import numpy as np
from scipy import integrate

from .base import (
    AlphaOrder, DerivativeResult, DomainError, FunctionHandle, NoLimitError,
    NonFiniteError, Value, as_alpha,
)

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
STEP_SCALE = np.finfo(float).eps ** (1.0 / 3.0)
CAUCHY_TOLERANCE = 1e-7
K_MAX = 40
EXTRAPOLATION_NODES = 6
QUADRATURE_TOLERANCE = 1e-12
GAUSS_ORDER = 10
MAX_PANELS = 4000

DERIVATIVE_METHODS = ('identity', 'substitution', 'quotient')
INTEGRAL_METHODS = ('substitution', 'direct')

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


# ---------------------------------------------------------------------------
# Closed-form reference functions
# ---------------------------------------------------------------------------

def ref_exp_alpha(t: Value, alpha: Union[AlphaOrder, float]) -> Value:
    """e^(t^alpha / alpha), the eigenfunction of T_alpha."""
    return np.exp(as_alpha(alpha).fractional_time(t))


def ref_sin_alpha(t: Value, alpha: Union[AlphaOrder, float]) -> Value:
    return np.sin(as_alpha(alpha).fractional_time(t))


def ref_cos_alpha(t: Value, alpha: Union[AlphaOrder, float]) -> Value:
    return np.cos(as_alpha(alpha).fractional_time(t))


# ---------------------------------------------------------------------------
# Differencing helpers
# ---------------------------------------------------------------------------

def _fit_step(center: float, lo: float, hi: float) -> float:
    """Default step max(|center|, 1) * eps^(1/3), shrunk to stay inside [lo, hi]."""
    h = min(max(abs(center), 1.0) * STEP_SCALE, (center - lo) / 2.0, (hi - center) / 2.0)
    if not h > 0:
        raise DomainError(f"difference stencil around {center!r} exits the domain [{lo}, {hi}]")
    return h


def _central(g: Callable[[float], Value], x: float, h: float) -> np.ndarray:
    return (np.asarray(g(x + h), dtype=float) - np.asarray(g(x - h), dtype=float)) / (2.0 * h)


def _richardson_derivative(g: Callable[[float], Value], x: float, h: float):
    """Central difference at h and h/2 combined to cancel the h^2 term."""
    coarse = _central(g, x, h)
    fine = _central(g, x, h / 2.0)
    value = fine + (fine - coarse) / 3.0
    error = float(np.max(np.abs(fine - coarse))) / 3.0
    return value, h / 2.0, error


def _unwrap(value: np.ndarray) -> Value:
    return float(value) if np.ndim(value) == 0 else value


def extrapolate_to_zero(nodes: Sequence[float], values: Sequence[np.ndarray]) -> np.ndarray:
    """Neville's scheme: value at 0 of the polynomial through (nodes[i], values[i])."""
    x = list(nodes)
    p = [np.asarray(v, dtype=float) for v in values]
    n = len(p)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (x[i] * p[i + 1] - x[i + m] * p[i]) / (x[i] - x[i + m])
    return p[0]


# ---------------------------------------------------------------------------
# Derivative
# ---------------------------------------------------------------------------

def conformable_derivative(f: FunctionHandle, t: float, alpha: Union[AlphaOrder, float],
                           method: str = 'identity') -> DerivativeResult:
    """Numerical T_alpha(f)(t) for t > 0.

    ``identity`` differences f in t and scales by t^(1-alpha);
    ``substitution`` differences tau -> f((alpha*tau)^(1/alpha)) at tau = t^alpha/alpha;
    ``quotient`` evaluates the defining quotient at a single eps, for cross-checks.
    Array valued handles are differentiated entrywise.
    """
    alpha = as_alpha(alpha)
    if not t > 0:
        raise DomainError(f"conformable derivative needs t > 0, got {t!r}")
    if not f.t_min < t < f.t_max:
        raise DomainError(f"difference stencil around t={t!r} exits the domain of {f.label}")

    if method == 'identity':
        h = _fit_step(t, f.t_min, f.t_max)
        value, step, error = _richardson_derivative(f, t, h)
        scale = t ** (1.0 - alpha.value)
        return DerivativeResult(_unwrap(scale * value), step, scale * error)

    if method == 'substitution':
        tau = alpha.fractional_time(t)
        tau_lo = alpha.fractional_time(f.t_min)
        tau_hi = alpha.fractional_time(f.t_max)

        def in_tau(s: float) -> Value:
            return f(min(max(alpha.physical_time(s), f.t_min), f.t_max))

        h = _fit_step(tau, tau_lo, tau_hi)
        value, step, error = _richardson_derivative(in_tau, tau, h)
        return DerivativeResult(_unwrap(value), step, error)

    if method == 'quotient':
        eps = max(t, 1.0) * STEP_SCALE
        reach = t + eps * t ** (1.0 - alpha.value)
        if reach > f.t_max:
            raise DomainError(f"quotient point {reach!r} exits the domain of {f.label}")
        quotient = (np.asarray(f(reach), dtype=float) - np.asarray(f(t), dtype=float)) / eps
        reference = conformable_derivative(f, t, alpha, method='identity')
        gap = float(np.max(np.abs(quotient - reference.value)))
        logger.debug(f"quotient check for {f.label} at t={t:g}: gap {gap:.3g}")
        return DerivativeResult(_unwrap(quotient), eps, gap)

    raise DomainError(f"unknown derivative method {method!r}; expected one of {DERIVATIVE_METHODS}")


def conformable_derivative_at_zero(f: FunctionHandle, alpha: Union[AlphaOrder, float],
                                   b: float = None,
                                   tolerance: float = CAUCHY_TOLERANCE,
                                   k_max: int = K_MAX) -> DerivativeResult:
    """f^(alpha)(0) := lim_{t -> 0+} f^(alpha)(t).

    Samples the derivative along t_k = b * 2^-k and extrapolates each new
    sample set to tau = 0 using nodes whose tau values at least halve. Stops on
    the Cauchy criterion |E_k - E_{k-1}| <= tolerance * max(1, |E_k|).
    """
    alpha = as_alpha(alpha)
    if f.t_min > 0:
        raise DomainError(f"{f.label} must be defined on [0, b) to take a limit at 0")
    if b is None:
        b = min(1.0, f.width) / 2.0
    if not 0 < b < f.t_max:
        raise DomainError(f"sequence start b={b!r} must lie inside the domain of {f.label}")

    stride = max(1, math.ceil(1.0 / alpha.value))
    taus: List[float] = []
    samples: List[np.ndarray] = []
    previous = None
    increment = math.inf

    for k in range(k_max + 1):
        t_k = b * 2.0 ** -k
        result = conformable_derivative(f, t_k, alpha, method='substitution')
        taus.append(alpha.fractional_time(t_k))
        samples.append(np.asarray(result.value, dtype=float))

        picks = list(range(k, -1, -stride))[:EXTRAPOLATION_NODES]
        with np.errstate(over='ignore', invalid='ignore'):
            estimate = extrapolate_to_zero([taus[i] for i in picks], [samples[i] for i in picks])
        if not np.all(np.isfinite(estimate)):
            previous = None
            continue

        if previous is not None and len(picks) >= 2:
            increment = float(np.max(np.abs(estimate - previous)))
            if increment <= tolerance * max(1.0, float(np.max(np.abs(estimate)))):
                logger.debug(f"limit of {f.label} at 0 settled after {k + 1} terms (increment {increment:.3g})")
                return DerivativeResult(_unwrap(estimate), t_k, increment)
        previous = estimate

    raise NoLimitError(
        f"{f.label} has no alpha-derivative limit at 0 (alpha={alpha.value:g}): "
        f"last increment {increment:.3g} after {k_max + 1} terms"
    )


# ---------------------------------------------------------------------------
# Integral
# ---------------------------------------------------------------------------

def _gauss_panel(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return half * float(np.dot(_GL_WEIGHTS, func(mid + half * _GL_NODES)))


def adaptive_gauss_legendre(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                            tolerance: float = QUADRATURE_TOLERANCE) -> float:
    """Composite Gauss-Legendre quadrature with panel bisection to an absolute tolerance."""
    total = 0.0
    panels = 0
    stack = [(lo, hi, _gauss_panel(func, lo, hi), tolerance)]
    while stack:
        a, b, whole, budget = stack.pop()
        mid = 0.5 * (a + b)
        left = _gauss_panel(func, a, mid)
        right = _gauss_panel(func, mid, b)
        panels += 1
        if abs(left + right - whole) <= budget or panels >= MAX_PANELS or mid in (a, b):
            if panels >= MAX_PANELS:
                logger.warning(f"quadrature panel budget exhausted on [{lo:g}, {hi:g}]")
            total += left + right
        else:
            stack.append((mid, b, right, budget / 2.0))
            stack.append((a, mid, left, budget / 2.0))
    return total


def fractional_integral(f: FunctionHandle, a: float, t: float, alpha: Union[AlphaOrder, float],
                        method: str = 'substitution',
                        tolerance: float = QUADRATURE_TOLERANCE) -> float:
    """I_alpha^a(f)(t) = integral_a^t f(x) x^(alpha-1) dx."""
    alpha = as_alpha(alpha)
    if a < 0:
        raise DomainError(f"integral start a must be >= 0, got {a!r}")
    if not t > a:
        raise DomainError(f"integral needs t > a, got a={a!r}, t={t!r}")
    if a < f.t_min or t > f.t_max:
        raise DomainError(f"[{a}, {t}] is not inside the domain of {f.label}")

    if method == 'substitution':
        inverse = 1.0 / alpha.value

        def integrand(u: np.ndarray) -> np.ndarray:
            return f.evaluate_many(np.clip(np.power(u, inverse), a, t))

        # dx x^(alpha-1) = du / alpha under u = x^alpha
        lo, hi = a ** alpha.value, t ** alpha.value
        return adaptive_gauss_legendre(integrand, lo, hi, tolerance * alpha.value) / alpha.value

    if method == 'direct':
        if a == 0:
            value, abserr = integrate.quad(f, 0.0, t, weight='alg', wvar=(alpha.value - 1.0, 0.0),
                                           epsabs=tolerance, limit=200)
        else:
            value, abserr = integrate.quad(lambda x: f(x) * x ** (alpha.value - 1.0), a, t,
                                           epsabs=tolerance, limit=200)
        if not math.isfinite(value):
            raise NonFiniteError(f"direct quadrature of {f.label} on [{a}, {t}] is not finite")
        logger.debug(f"direct quadrature of {f.label}: {value:.17g} (+/- {abserr:.2g})")
        return value

    raise DomainError(f"unknown integral method {method!r}; expected one of {INTEGRAL_METHODS}")
