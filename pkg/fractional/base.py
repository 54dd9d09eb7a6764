import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

Value = Union[float, np.ndarray]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class FracSemiError(Exception):
    """Base class for every error raised by the fractional package."""


class DomainError(FracSemiError, ValueError):
    """A precondition on the inputs does not hold."""


class DimensionError(DomainError):
    """Matrix and vector sizes do not agree."""


class InsufficientSamplesError(DomainError):
    """Not enough samples for the requested differencing."""


class NumericalError(FracSemiError, ArithmeticError):
    """A computation failed for numerical reasons."""


class NonFiniteError(NumericalError):
    """A NaN or infinity turned up where a finite number was required."""


class NoLimitError(NumericalError):
    """A sequence failed the Cauchy criterion within its term budget."""


class CFLViolationError(NumericalError):
    """The explicit scheme was asked to step faster than its stability limit."""


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaOrder:
    """Fractional order alpha, restricted to (0, 1]."""

    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or not 0.0 < value <= 1.0:
            raise DomainError(f"alpha must be in (0,1], got {self.value!r}")
        object.__setattr__(self, 'value', value)

    def __float__(self) -> float:
        return self.value

    def fractional_time(self, t: Value) -> Value:
        """tau = t^alpha / alpha; exact identity at alpha = 1."""
        if isinstance(t, np.ndarray):
            return np.power(t, self.value) / self.value
        return t ** self.value / self.value

    def physical_time(self, tau: Value) -> Value:
        """Inverse of fractional_time: t = (alpha * tau)^(1/alpha)."""
        if isinstance(tau, np.ndarray):
            return np.power(self.value * tau, 1.0 / self.value)
        return (self.value * tau) ** (1.0 / self.value)


def as_alpha(alpha: Union[AlphaOrder, float]) -> AlphaOrder:
    return alpha if isinstance(alpha, AlphaOrder) else AlphaOrder(alpha)


@dataclass(frozen=True, eq=False)
class FunctionHandle:
    """A real (or array) valued function of a nonnegative real on [t_min, t_max].

    ``func`` must be deterministic. When ``vectorized`` is set it is expected to
    accept numpy arrays and evaluate pointwise.
    """

    func: Callable[[Value], Value]
    t_min: float = 0.0
    t_max: float = math.inf
    name: str = ""
    vectorized: bool = True

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise DomainError(f"empty domain [{self.t_min}, {self.t_max}] for {self.label}")
        if self.t_min < 0:
            raise DomainError(f"domain of {self.label} must lie in [0, inf), got t_min={self.t_min}")

    @property
    def label(self) -> str:
        return self.name or getattr(self.func, '__name__', 'function')

    @property
    def width(self) -> float:
        return self.t_max - self.t_min

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max

    def __call__(self, t: float) -> Value:
        if not self.contains(t):
            raise DomainError(f"{self.label} evaluated at t={t!r} outside [{self.t_min}, {self.t_max}]")
        value = self.func(t)
        if not np.all(np.isfinite(value)):
            raise NonFiniteError(f"{self.label} returned a non-finite value at t={t!r}")
        return value

    def evaluate_many(self, points: Iterable[float]) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.size and (points.min() < self.t_min or points.max() > self.t_max):
            raise DomainError(
                f"{self.label} sampled on [{points.min()}, {points.max()}] "
                f"outside [{self.t_min}, {self.t_max}]"
            )
        if self.vectorized:
            values = np.asarray(self.func(points), dtype=float)
            if values.shape != points.shape:
                values = np.broadcast_to(values, points.shape).copy()
        else:
            values = np.array([self.func(float(p)) for p in points], dtype=float)
        if not np.all(np.isfinite(values)):
            bad = points[~np.isfinite(values)][0]
            raise NonFiniteError(f"{self.label} returned a non-finite value at t={bad!r}")
        return values

    def shifted(self, shift: float) -> 'FunctionHandle':
        """The handle x -> f(x + shift), with its domain moved left by shift."""
        if shift == 0:
            return self
        func = self.func
        return FunctionHandle(
            func=lambda x: func(x + shift),
            t_min=max(0.0, self.t_min - shift),
            t_max=self.t_max - shift,
            name=f"{self.label}(x+{shift:g})",
            vectorized=self.vectorized,
        )


@dataclass(frozen=True)
class DerivativeResult:
    value: Value
    step_used: float
    estimated_error: float

    def __post_init__(self):
        if not self.estimated_error >= 0:
            raise NumericalError(f"estimated_error must be >= 0, got {self.estimated_error!r}")
