"""
The alpha-abstract Cauchy problem u^(alpha)(t) = A u(t), u(0) = u0.

``solve_exact`` applies the semigroup, u(t) = exp((t^alpha/alpha) A) u0.
``solve_numeric`` is an independent oracle: in tau = t^alpha/alpha the problem
is the classical linear system du/dtau = A u, integrated with fixed-step RK4.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import KroghInterpolator

from .base import (
    AlphaOrder, DimensionError, DomainError, FunctionHandle,
    InsufficientSamplesError, NonFiniteError, as_alpha,
)
from .conformable import conformable_derivative
from .matrix_semigroup import AlphaSemigroup, as_matrix, as_state

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
INTERPOLATION_POINTS = 4
MIN_INTERIOR_POINTS = 5


@dataclass(frozen=True, eq=False)
class CauchyProblem:
    generator: np.ndarray
    initial: np.ndarray
    alpha: AlphaOrder
    horizon: float

    def __post_init__(self):
        generator = as_matrix(self.generator, "generator")
        object.__setattr__(self, 'generator', generator)
        object.__setattr__(self, 'initial', as_state(self.initial, generator.shape[0], "initial state"))
        object.__setattr__(self, 'alpha', as_alpha(self.alpha))
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise DomainError(f"horizon must be a finite positive time, got {self.horizon!r}")
        object.__setattr__(self, 'horizon', float(self.horizon))

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    @property
    def semigroup(self) -> AlphaSemigroup:
        return AlphaSemigroup(self.generator, self.alpha)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples u(times[k]) = states[k]; states has one row per time."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        states = np.array(self.states, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise DomainError("trajectory needs a non-empty list of times")
        if times[0] < 0 or np.any(np.diff(times) <= 0):
            raise DomainError("trajectory times must be nonnegative and strictly increasing")
        if states.ndim != 2 or states.shape[0] != times.size:
            raise DimensionError(f"expected {times.size} state rows, got shape {states.shape}")
        if not np.all(np.isfinite(states)):
            raise NonFiniteError("trajectory has non-finite states")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'states', states)

    def __len__(self) -> int:
        return self.times.size

    @property
    def dimension(self) -> int:
        return self.states.shape[1]


def _check_times(problem: CauchyProblem, times: Sequence[float]) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0:
        raise DomainError("times must be a non-empty list starting at 0")
    if np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly increasing")
    if times[-1] > problem.horizon:
        raise DomainError(f"time {times[-1]!r} is past the horizon {problem.horizon!r}")
    return times


# ---------------------------------------------------------------------------
# Exact solution
# ---------------------------------------------------------------------------

def solve_exact(problem: CauchyProblem, times: Sequence[float], workers: int = 1) -> Trajectory:
    """u(t) = T(t) u0 at each requested time; states[0] is u0 itself."""
    times = _check_times(problem, times)
    semigroup = problem.semigroup
    states = np.empty((times.size, problem.dimension))
    states[0] = problem.initial

    def state_at(t: float) -> np.ndarray:
        return semigroup.evaluate(t) @ problem.initial

    if workers > 1 and times.size > 2:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(state_at, t): k for k, t in enumerate(times[1:], start=1)}
            for future in as_completed(futures):
                states[futures[future]] = future.result()
    else:
        for k in range(1, times.size):
            states[k] = state_at(times[k])

    logger.debug(f"exact trajectory: {times.size} samples up to t={times[-1]:g}")
    return Trajectory(times, states)


# ---------------------------------------------------------------------------
# Independent RK4 oracle
# ---------------------------------------------------------------------------

def _rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t0: float, h: float,
              y0: np.ndarray) -> np.ndarray:
    k1 = rhs(t0, y0)
    k2 = rhs(t0 + 0.5 * h, y0 + 0.5 * h * k1)
    k3 = rhs(t0 + 0.5 * h, y0 + 0.5 * h * k2)
    k4 = rhs(t0 + h, y0 + h * k3)
    return y0 + h * (1 / 6 * k1 + 1 / 3 * k2 + 1 / 3 * k3 + 1 / 6 * k4)


def rk4_integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0: Sequence[float],
                  grid: Sequence[float]) -> np.ndarray:
    """Classical 4th-order Runge-Kutta over the given grid; row k is y(grid[k])."""
    grid = np.asarray(grid, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    ys = np.empty((grid.size, y0.size))
    ys[0] = y0
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(grid.size - 1):
            ys[k + 1] = _rk4_step(rhs, grid[k], grid[k + 1] - grid[k], ys[k])
            if not np.all(np.isfinite(ys[k + 1])):
                raise NonFiniteError(f"RK4 state overflowed at step {k + 1} (t={grid[k + 1]:g})")
    return ys


def solve_numeric(problem: CauchyProblem, n_steps: int) -> Trajectory:
    """RK4 on a uniform tau grid over [0, horizon^alpha/alpha], reported at t_k = (alpha tau_k)^(1/alpha)."""
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps!r}")
    alpha = problem.alpha
    generator = problem.generator
    tau_grid = np.linspace(0.0, alpha.fractional_time(problem.horizon), n_steps + 1)
    # linear and autonomous: one RK4 step is a fixed matrix applied to the state
    step = _rk4_step(lambda tau, y: generator @ y, 0.0, tau_grid[1], np.eye(problem.dimension))
    states = np.empty((tau_grid.size, problem.dimension))
    states[0] = problem.initial
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(n_steps):
            states[k + 1] = step @ states[k]
    if not np.all(np.isfinite(states)):
        raise NonFiniteError(f"RK4 state overflowed over tau in [0, {tau_grid[-1]:g}]")
    times = alpha.physical_time(tau_grid)
    times[0] = 0.0
    times[-1] = problem.horizon
    return Trajectory(times, states)


# ---------------------------------------------------------------------------
# Residual of a sampled trajectory
# ---------------------------------------------------------------------------

def cubic_interpolant(trajectory: Trajectory) -> FunctionHandle:
    """Piecewise cubic through the four samples nearest each query."""
    times = trajectory.times
    states = trajectory.states
    if times.size < INTERPOLATION_POINTS:
        raise InsufficientSamplesError(
            f"cubic interpolation needs {INTERPOLATION_POINTS} samples, got {times.size}"
        )
    last_start = times.size - INTERPOLATION_POINTS

    def interpolate(t: float) -> np.ndarray:
        start = min(max(int(np.searchsorted(times, t, side='right')) - 2, 0), last_start)
        window = slice(start, start + INTERPOLATION_POINTS)
        return KroghInterpolator(times[window], states[window])(t)

    return FunctionHandle(interpolate, t_min=float(times[0]), t_max=float(times[-1]),
                          name="trajectory interpolant", vectorized=False)


def residual_check(problem: CauchyProblem, trajectory: Trajectory) -> float:
    """max_k ||D_alpha u(t_k) - A u(t_k)|| over interior samples, D_alpha taken on the interpolant.

    Samples whose interpolation window reaches t = 0 are skipped along with t = 0 itself.
    """
    if trajectory.dimension != problem.dimension:
        raise DimensionError(
            f"trajectory has dimension {trajectory.dimension}, problem has {problem.dimension}"
        )
    times = trajectory.times
    first = INTERPOLATION_POINTS - 1 if times[0] == 0 else 1
    interior = range(first, times.size - 1)
    if len(interior) < MIN_INTERIOR_POINTS:
        raise InsufficientSamplesError(
            f"residual check needs {MIN_INTERIOR_POINTS} interior samples, got {max(len(interior), 0)}"
        )

    interpolant = cubic_interpolant(trajectory)
    worst = 0.0
    for k in interior:
        derivative = conformable_derivative(interpolant, float(times[k]), problem.alpha).value
        gap = float(np.linalg.norm(np.asarray(derivative) - problem.generator @ trajectory.states[k]))
        worst = max(worst, gap)
    logger.debug(f"residual over {len(interior)} interior samples: {worst:.3g}")
    return worst
