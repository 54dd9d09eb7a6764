"""
Finite-dimensional alpha-semigroups T(t) = exp((t^alpha / alpha) A).

For a bounded generator A this family satisfies T(0) = I and
T((s+t)^(1/alpha)) = T(s^(1/alpha)) T(t^(1/alpha)); at alpha = 1 it is the
classical exp(tA). The exponential itself is computed with a fixed [6/6]
Pade approximant after scaling M by 2^-s so that ||M||_1 / 2^s <= 0.5,
followed by s squarings.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .base import (
    AlphaOrder, DimensionError, DomainError, FunctionHandle, NoLimitError,
    NonFiniteError, as_alpha,
)
from .conformable import conformable_derivative, conformable_derivative_at_zero

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
PADE_ORDER = 6
PADE_THETA = 0.5
SERIES_TERMS = 40
CONTINUITY_TERMS = 20
LAW_TOLERANCE = 1e-10

# c_k = (2q-k)! q! / ((2q)! k! (q-k)!) for the diagonal [q/q] approximant
_PADE_COEFFS = [
    math.factorial(2 * PADE_ORDER - k) * math.factorial(PADE_ORDER)
    / (math.factorial(2 * PADE_ORDER) * math.factorial(k) * math.factorial(PADE_ORDER - k))
    for k in range(PADE_ORDER + 1)
]


# ---------------------------------------------------------------------------
# Dense matrices and state vectors
# ---------------------------------------------------------------------------

def as_matrix(entries, name: str = "matrix") -> np.ndarray:
    """Read-only float64 copy of a square, finite matrix."""
    matrix = np.array(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionError(f"{name} must be square, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError(f"{name} has non-finite entries")
    matrix.setflags(write=False)
    return matrix


def as_state(entries, n: int, name: str = "state vector") -> np.ndarray:
    state = np.array(entries, dtype=float)
    if state.ndim != 1 or state.shape[0] != n:
        raise DimensionError(f"{name} must have {n} entries, got shape {state.shape}")
    if not np.all(np.isfinite(state)):
        raise DomainError(f"{name} has non-finite entries")
    state.setflags(write=False)
    return state


# ---------------------------------------------------------------------------
# Matrix exponential
# ---------------------------------------------------------------------------

def matrix_exponential(m: np.ndarray) -> np.ndarray:
    """exp(M) by scaling and squaring with a [6/6] Pade approximant."""
    m = as_matrix(m, "exponent")
    n = m.shape[0]
    norm = float(np.linalg.norm(m, 1))

    squarings = 0
    if norm > PADE_THETA:
        mantissa, squarings = math.frexp(norm / PADE_THETA)
        squarings -= mantissa == 0.5
    scaled = m / 2.0 ** squarings

    identity = np.eye(n)
    square = scaled @ scaled
    power = identity
    even = _PADE_COEFFS[0] * identity
    odd = _PADE_COEFFS[1] * identity
    for k in range(2, PADE_ORDER + 1, 2):
        power = power @ square
        even = even + _PADE_COEFFS[k] * power
        if k + 1 <= PADE_ORDER:
            odd = odd + _PADE_COEFFS[k + 1] * power
    odd = scaled @ odd

    with np.errstate(over='ignore', invalid='ignore'):
        result = linalg.solve(even - odd, even + odd)
        for _ in range(squarings):
            result = result @ result

    if not np.all(np.isfinite(result)):
        raise NonFiniteError(f"matrix exponential overflowed (||M||_1 = {norm:.6g})")
    return result


# ---------------------------------------------------------------------------
# Alpha-semigroup
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlphaSemigroup:
    """T(t) = exp((t^alpha / alpha) A) for a square generator A."""

    generator: np.ndarray
    alpha: AlphaOrder

    def __post_init__(self):
        object.__setattr__(self, 'generator', as_matrix(self.generator, "generator"))
        object.__setattr__(self, 'alpha', as_alpha(self.alpha))

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    def evaluate(self, t: float) -> np.ndarray:
        return semigroup_evaluate(self, t)

    def growth_factor(self, t: float) -> float:
        """Upper bound e^(||A||_F tau) for ||T(t)||_2, tau = t^alpha / alpha."""
        return math.exp(float(np.linalg.norm(self.generator)) * self.alpha.fractional_time(t))


def semigroup_evaluate(semigroup: AlphaSemigroup, t: float) -> np.ndarray:
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError(f"semigroup time must be a finite t >= 0, got {t!r}")
    if t == 0:
        return np.eye(semigroup.dimension)
    tau = semigroup.alpha.fractional_time(t)
    return matrix_exponential(tau * semigroup.generator)


def semigroup_series(semigroup: AlphaSemigroup, t: float, terms: int = SERIES_TERMS) -> np.ndarray:
    """Truncated power series sum_k (tau A)^k / k!, an independent check on semigroup_evaluate."""
    if not t >= 0:
        raise DomainError(f"semigroup time must be >= 0, got {t!r}")
    m = semigroup.alpha.fractional_time(t) * semigroup.generator
    term = np.eye(semigroup.dimension)
    total = term.copy()
    for k in range(1, terms + 1):
        term = term @ m / k
        total = total + term
    return total


def semigroup_law_residual(semigroup: AlphaSemigroup, s: float, t: float) -> float:
    """||T((s+t)^(1/alpha)) - T(s^(1/alpha)) T(t^(1/alpha))||_F."""
    if s < 0 or t < 0:
        raise DomainError(f"semigroup law needs s, t >= 0, got s={s!r}, t={t!r}")
    inverse = 1.0 / semigroup.alpha.value
    combined = semigroup_evaluate(semigroup, (s + t) ** inverse)
    product = semigroup_evaluate(semigroup, s ** inverse) @ semigroup_evaluate(semigroup, t ** inverse)
    return float(np.linalg.norm(combined - product, 'fro'))


def semigroup_law_tolerance(semigroup: AlphaSemigroup, s: float, t: float,
                            scale: float = LAW_TOLERANCE) -> float:
    """scale * max(1, ||T((s+t)^(1/alpha))||_F), the bound semigroup_law_residual is held to."""
    combined = semigroup_evaluate(semigroup, (s + t) ** (1.0 / semigroup.alpha.value))
    return scale * max(1.0, float(np.linalg.norm(combined, 'fro')))


def strong_continuity_profile(semigroup: AlphaSemigroup, x: Sequence[float],
                              k_max: int = CONTINUITY_TERMS) -> np.ndarray:
    """||T(2^-k) x - x||_2 for k = 0..k_max."""
    x = as_state(x, semigroup.dimension)
    return np.array([
        np.linalg.norm(semigroup_evaluate(semigroup, 2.0 ** -k) @ x - x)
        for k in range(k_max + 1)
    ])


# ---------------------------------------------------------------------------
# Generator recovery and commutation
# ---------------------------------------------------------------------------

def estimate_generator(semigroup, probes: Optional[Sequence[Sequence[float]]] = None,
                       b: Optional[float] = None) -> np.ndarray:
    """Recover A as the conformable derivative of T(t) at t = 0+.

    ``semigroup`` is used as a black box: only ``evaluate(t)``, ``alpha`` and
    ``dimension`` are read. Probes are columns of P; by default the canonical
    basis, in which case column j of the result is lim T^(alpha)(t) e_j.
    """
    n = semigroup.dimension
    basis = None if probes is None else np.array(probes, dtype=float)
    if basis is not None and basis.shape != (n, n):
        raise DimensionError(f"probe set must be {n}x{n} (one probe per column), got {basis.shape}")
    if basis is not None and np.linalg.matrix_rank(basis) < n:
        raise DomainError("probe set must span the space")

    def column_map(columns):
        if basis is None:
            return lambda t: semigroup.evaluate(t)[:, columns]
        return lambda t: semigroup.evaluate(t) @ basis[:, columns]

    alpha = as_alpha(semigroup.alpha)
    handle = FunctionHandle(column_map(slice(None)), name="T(t)P", vectorized=False)
    try:
        derivative = np.asarray(conformable_derivative_at_zero(handle, alpha, b=b).value)
    except NoLimitError:
        failed = []
        for j in range(n):
            column = FunctionHandle(column_map([j]), name=f"T(t)p_{j}", vectorized=False)
            try:
                conformable_derivative_at_zero(column, alpha, b=b)
            except NoLimitError:
                failed.append(j)
        raise NoLimitError(f"no generator limit at t=0+ for probe column(s) {failed or 'jointly'}")

    if basis is None:
        estimate = derivative
    else:
        estimate = np.linalg.solve(basis.T, derivative.T).T
    logger.debug(f"estimated {n}x{n} generator at alpha={alpha.value:g}")
    return estimate


def commutation_residual(semigroup: AlphaSemigroup, t: float, x: Sequence[float]) -> Tuple[float, float]:
    """(||D - A T(t) x||, ||D - T(t) A x||) with D the numerical T^(alpha)(t) x."""
    if not t > 0:
        raise DomainError(f"commutation check needs t > 0, got {t!r}")
    x = as_state(x, semigroup.dimension)
    trajectory = FunctionHandle(lambda s: semigroup_evaluate(semigroup, s) @ x,
                                name="T(t)x", vectorized=False)
    derivative = np.asarray(conformable_derivative(trajectory, t, semigroup.alpha).value)
    at_t = semigroup_evaluate(semigroup, t)
    generator = semigroup.generator
    return (
        float(np.linalg.norm(derivative - generator @ (at_t @ x))),
        float(np.linalg.norm(derivative - at_t @ (generator @ x))),
    )
