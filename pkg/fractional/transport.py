"""
Translation alpha-semigroup and the fractional transport equation.

(T(t) g)(x) = g(x + t^alpha/alpha) moves the graph of g to the left. It solves

    d^alpha u / dt^alpha = du/dx,   u(x, 0) = g(x)

exactly, and its generator is g -> g'. In tau = t^alpha/alpha the equation is
plain left-moving advection, which is what the upwind scheme steps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .base import (
    AlphaOrder, CFLViolationError, DimensionError, DomainError, FunctionHandle,
    NonFiniteError, as_alpha,
)
from .conformable import conformable_derivative, conformable_derivative_at_zero

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
DEFAULT_COURANT = 0.5
CFL_SLACK = 1e-12
CONTINUITY_TERMS = 20


# ---------------------------------------------------------------------------
# Grids and sampled functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [0, x_max]."""

    x_max: float
    n_points: int

    x_min = 0.0

    def __post_init__(self):
        if not (self.x_max > 0 and math.isfinite(self.x_max)):
            raise DomainError(f"grid length must be a finite positive number, got {self.x_max!r}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError(f"grid needs at least 3 points, got {self.n_points!r}")
        object.__setattr__(self, 'x_max', float(self.x_max))
        object.__setattr__(self, 'n_points', int(self.n_points))

    @property
    def spacing(self) -> float:
        return self.x_max / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise DimensionError(f"expected {self.grid.n_points} grid values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("grid function has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def max_gap(self, other: 'GridFunction') -> float:
        if other.grid != self.grid:
            raise DimensionError("grid functions live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def sample(g: FunctionHandle, grid: Grid1D) -> GridFunction:
    return GridFunction(grid, g.evaluate_many(grid.points))


@dataclass(frozen=True, eq=False)
class TransportProblem:
    """Initial profile g on the characteristic reach [0, x_max + horizon^alpha/alpha]."""

    profile: FunctionHandle
    alpha: AlphaOrder
    grid: Grid1D
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, 'alpha', as_alpha(self.alpha))
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise DomainError(f"horizon must be a finite positive time, got {self.horizon!r}")
        if self.profile.t_min > 0 or self.profile.t_max < self.reach:
            raise DomainError(
                f"profile {self.profile.label} must be defined on [0, {self.reach:g}], "
                f"got [{self.profile.t_min:g}, {self.profile.t_max:g}]"
            )

    @property
    def reach(self) -> float:
        return self.grid.x_max + self.alpha.fractional_time(self.horizon)

    def _check_time(self, t: float):
        if not 0 <= t <= self.horizon:
            raise DomainError(f"time {t!r} is outside [0, {self.horizon!r}]")


# ---------------------------------------------------------------------------
# Translation semigroup
# ---------------------------------------------------------------------------

def translate(g: FunctionHandle, t: float, alpha: Union[AlphaOrder, float]) -> FunctionHandle:
    """T(t) g as a handle: x -> g(x + t^alpha/alpha)."""
    if not t >= 0:
        raise DomainError(f"translation time must be >= 0, got {t!r}")
    return g.shifted(as_alpha(alpha).fractional_time(t))


def translation_apply(g: FunctionHandle, t: float, alpha: Union[AlphaOrder, float],
                      grid: Grid1D) -> GridFunction:
    shifted = translate(g, t, alpha)
    if grid.x_max > shifted.t_max:
        raise DomainError(
            f"translation by t={t!r} needs {g.label} up to "
            f"{grid.x_max + as_alpha(alpha).fractional_time(t):g}, domain ends at {g.t_max:g}"
        )
    return sample(shifted, grid)


def translation_generator_apply(f: GridFunction) -> GridFunction:
    """Af = f' with second-order central differences and one-sided second-order ends."""
    return GridFunction(f.grid, np.gradient(f.values, f.grid.spacing, edge_order=2))


def _time_reach(g: FunctionHandle, alpha: AlphaOrder, grid: Grid1D) -> float:
    """Largest t for which T(t) g can still be sampled on the grid."""
    room = g.t_max - grid.x_max
    if room <= 0:
        raise DomainError(f"{g.label} is not defined beyond the grid end {grid.x_max:g}")
    return alpha.physical_time(room) if math.isfinite(room) else math.inf


def _orbit(g: FunctionHandle, alpha: AlphaOrder, grid: Grid1D) -> FunctionHandle:
    """t -> T(t) g sampled on the grid, as a vector valued handle."""
    return FunctionHandle(
        lambda t: translation_apply(g, t, alpha, grid).values,
        t_max=_time_reach(g, alpha, grid),
        name=f"T(t){g.label}",
        vectorized=False,
    )


def translation_generator_limit(g: FunctionHandle, alpha: Union[AlphaOrder, float],
                                grid: Grid1D) -> GridFunction:
    """The generator taken as the alpha-derivative of t -> T(t) g at t = 0+; equals g'."""
    alpha = as_alpha(alpha)
    result = conformable_derivative_at_zero(_orbit(g, alpha, grid), alpha)
    return GridFunction(grid, result.value)


def translation_continuity_profile(g: FunctionHandle, alpha: Union[AlphaOrder, float], grid: Grid1D,
                                   k_max: int = CONTINUITY_TERMS) -> np.ndarray:
    """sup_x |T(2^-k) g - g| on the grid for k = 0..k_max."""
    alpha = as_alpha(alpha)
    base = sample(g, grid)
    return np.array([
        translation_apply(g, 2.0 ** -k, alpha, grid).max_gap(base)
        for k in range(k_max + 1)
    ])


# ---------------------------------------------------------------------------
# Transport problem
# ---------------------------------------------------------------------------

def solve_transport_exact(problem: TransportProblem, t: float) -> GridFunction:
    """u(x, t) = g(x + t^alpha/alpha)."""
    problem._check_time(t)
    return translation_apply(problem.profile, t, problem.alpha, problem.grid)


def cfl_steps(problem: TransportProblem, t: float, courant: float = DEFAULT_COURANT) -> int:
    """Smallest step count with dtau <= courant * dx."""
    if not 0 < courant <= 1:
        raise DomainError(f"courant number must be in (0,1], got {courant!r}")
    tau = problem.alpha.fractional_time(t)
    limit = courant * problem.grid.spacing
    steps = max(1, math.ceil(tau / limit))
    while tau / steps > limit:
        steps += 1
    return steps


def solve_transport_fd(problem: TransportProblem, t: float, n_steps: int) -> GridFunction:
    """First-order upwind in tau with exact inflow at x_max."""
    problem._check_time(t)
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps!r}")
    grid = problem.grid
    u = problem.profile.evaluate_many(grid.points).copy()
    if t == 0:
        return GridFunction(grid, u)

    dtau = problem.alpha.fractional_time(t) / n_steps
    courant = dtau / grid.spacing
    if courant > 1 + CFL_SLACK:
        raise CFLViolationError(
            f"dtau={dtau:.6g} exceeds dx={grid.spacing:.6g} (courant {courant:.4g}); "
            f"use at least {cfl_steps(problem, t, 1.0)} steps"
        )
    inflow = problem.profile.evaluate_many(grid.x_max + dtau * np.arange(1, n_steps + 1))

    # characteristics run leftward: forward difference in x
    for k in range(n_steps):
        u[:-1] = u[:-1] + courant * (u[1:] - u[:-1])
        u[-1] = inflow[k]
    logger.debug(f"upwind: {n_steps} steps, courant {courant:.3g}, dx {grid.spacing:.3g}")
    return GridFunction(grid, u)


def pde_residual(problem: TransportProblem, t: float) -> float:
    """max over interior x of |D_t^alpha u(x, t) - D_x u(x, t)| for the exact solution."""
    if not t > 0:
        raise DomainError(f"pde residual needs t > 0, got {t!r}")
    problem._check_time(t)
    alpha = problem.alpha
    profile = problem.profile
    # the last grid point is not compared, so its characteristic leaves room for the time stencil
    points = problem.grid.points[:-1]
    room = profile.t_max - points[-1]
    orbit = FunctionHandle(
        lambda s: profile.evaluate_many(points + alpha.fractional_time(s)),
        t_max=alpha.physical_time(room) if math.isfinite(room) else math.inf,
        name=f"T(t){profile.label}",
        vectorized=False,
    )
    in_time = np.asarray(conformable_derivative(orbit, t, alpha).value)
    in_space = translation_generator_apply(solve_transport_exact(problem, t)).values
    return float(np.max(np.abs(in_time[1:] - in_space[1:-1])))
