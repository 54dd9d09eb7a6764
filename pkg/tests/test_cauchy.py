"""
test_cauchy.py - Unit tests for the alpha-abstract Cauchy problem.

  1. TestProblemRecords   - CauchyProblem and Trajectory validation
  2. TestSolveExact       - u(t) = T(t) u0 closed forms, determinism, threading
  3. TestSolveNumeric     - RK4 in tau as an independent oracle, order 4
  4. TestResidualCheck    - residual of sampled trajectories

Run from the project root:
    python -m unittest tests/test_cauchy.py -v
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(PROJECT_ROOT))

from fractional import DimensionError, DomainError, InsufficientSamplesError, NonFiniteError  # noqa: E402
from fractional.cauchy import (  # noqa: E402
    CauchyProblem, Trajectory, cubic_interpolant, residual_check, rk4_integrate,
    solve_exact, solve_numeric,
)
from fractional.properties import generator_family, unit_vector  # noqa: E402

ROTATION = [[0.0, 1.0], [-1.0, 0.0]]


def rotation_times():
    return np.concatenate([[0.0], np.linspace(0.1, 2.0, 200)])


# ---------------------------------------------------------------------------
# 1. TestProblemRecords
# ---------------------------------------------------------------------------
class TestProblemRecords(unittest.TestCase):
    """Construction-time checks."""

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            CauchyProblem(ROTATION, [1.0], 0.5, 1.0)

    def test_horizon_positive(self):
        with self.assertRaises(DomainError):
            CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 0.0)

    def test_non_square_generator(self):
        with self.assertRaises(DimensionError):
            CauchyProblem([[1.0, 2.0]], [1.0], 0.5, 1.0)

    def test_trajectory_times_increase(self):
        with self.assertRaises(DomainError):
            Trajectory([0.0, 1.0, 1.0], np.zeros((3, 1)))

    def test_trajectory_state_rows(self):
        with self.assertRaises(DimensionError):
            Trajectory([0.0, 1.0], np.zeros((3, 1)))

    def test_trajectory_finite(self):
        with self.assertRaises(NonFiniteError):
            Trajectory([0.0, 1.0], [[1.0], [float('inf')]])


# ---------------------------------------------------------------------------
# 2. TestSolveExact
# ---------------------------------------------------------------------------
class TestSolveExact(unittest.TestCase):
    """Semigroup solution u(t) = T(t) u0."""

    def test_scalar_eigensolution(self):
        problem = CauchyProblem([[1.0]], [1.0], 0.5, 1.0)
        endpoint = solve_exact(problem, [0.0, 1.0]).states[-1, 0]
        self.assertLessEqual(abs(endpoint - math.exp(2.0)) / math.exp(2.0), 1e-10)

    def test_zero_generator_is_constant(self):
        problem = CauchyProblem(np.zeros((3, 3)), [1.0, -2.0, 0.5], 0.3, 5.0)
        trajectory = solve_exact(problem, [0.0, 0.5, 1.0, 5.0])
        for state in trajectory.states:
            np.testing.assert_array_equal(state, [1.0, -2.0, 0.5])

    def test_rotation_quarter_turn(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 1.0, math.pi)
        endpoint = solve_exact(problem, [0.0, math.pi / 2]).states[-1]
        np.testing.assert_allclose(endpoint, [0.0, -1.0], atol=1e-14)

    def test_initial_state_exact(self):
        u0 = [0.1, 1.0 / 3.0]
        trajectory = solve_exact(CauchyProblem(ROTATION, u0, 0.7, 2.0), [0.0, 1.0, 2.0])
        self.assertTrue(np.array_equal(trajectory.states[0], np.array(u0)))
        self.assertEqual(len(trajectory), 3)

    def test_deterministic(self):
        problem = CauchyProblem(generator_family(count=5)[4], unit_vector(2, np.random.default_rng(1)), 0.5, 2.0)
        first = solve_exact(problem, rotation_times())
        second = solve_exact(problem, rotation_times())
        self.assertTrue(np.array_equal(first.states, second.states))

    def test_threaded_matches_serial(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 2.0)
        serial = solve_exact(problem, rotation_times())
        threaded = solve_exact(problem, rotation_times(), workers=4)
        self.assertTrue(np.array_equal(serial.states, threaded.states))

    def test_perturbation_bound(self):
        a = np.array([[0.5, 1.0], [-2.0, -0.3]])
        u0 = np.array([1.0, 1.0])
        delta = np.array([1e-3, -2e-3])
        for alpha in (0.25, 0.5, 1.0):
            problem = CauchyProblem(a, u0, alpha, 2.0)
            moved = CauchyProblem(a, u0 + delta, alpha, 2.0)
            gap = np.linalg.norm(solve_exact(moved, [0.0, 2.0]).states[-1] - solve_exact(problem, [0.0, 2.0]).states[-1])
            operator_norm = np.linalg.norm(problem.semigroup.evaluate(2.0), 2)
            self.assertLessEqual(gap, operator_norm * np.linalg.norm(delta) * (1 + 1e-12))

    def test_times_must_start_at_zero(self):
        with self.assertRaises(DomainError):
            solve_exact(CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 2.0), [0.5, 1.0])

    def test_times_past_horizon(self):
        with self.assertRaises(DomainError):
            solve_exact(CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 2.0), [0.0, 3.0])

    def test_unsorted_times(self):
        with self.assertRaises(DomainError):
            solve_exact(CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 2.0), [0.0, 1.0, 0.5])


# ---------------------------------------------------------------------------
# 3. TestSolveNumeric
# ---------------------------------------------------------------------------
class TestSolveNumeric(unittest.TestCase):
    """Fixed-step RK4 in tau = t^alpha/alpha."""

    def test_rk4_exponential(self):
        grid = np.linspace(0.0, 1.0, 101)
        ys = rk4_integrate(lambda t, y: y, [1.0], grid)
        self.assertAlmostEqual(ys[-1, 0], math.e, delta=1e-9)

    def test_rk4_overflow(self):
        with self.assertRaises(NonFiniteError):
            rk4_integrate(lambda t, y: y * y, [1e200], [0.0, 1.0, 2.0])

    def test_matches_generic_stepper(self):
        a = generator_family(count=6)[5]
        u0 = unit_vector(a.shape[0], np.random.default_rng(3))
        problem = CauchyProblem(a, u0, 0.5, 1.0)
        trajectory = solve_numeric(problem, 64)
        tau_grid = np.linspace(0.0, 2.0, 65)
        generic = rk4_integrate(lambda tau, y: a @ y, u0, tau_grid)
        np.testing.assert_allclose(trajectory.states, generic, rtol=1e-12, atol=1e-12 * np.max(np.abs(generic)))

    def test_numeric_overflow(self):
        with self.assertRaises(NonFiniteError):
            solve_numeric(CauchyProblem([[1000.0]], [1.0], 1.0, 40.0), 40)

    def test_zero_generator_exact(self):
        problem = CauchyProblem(np.zeros((2, 2)), [2.0, 3.0], 0.5, 1.0)
        trajectory = solve_numeric(problem, 3)
        for state in trajectory.states:
            np.testing.assert_array_equal(state, [2.0, 3.0])

    def test_scalar_endpoint(self):
        problem = CauchyProblem([[1.0]], [1.0], 0.5, 1.0)
        trajectory = solve_numeric(problem, 1000)
        self.assertEqual(trajectory.times[-1], 1.0)
        self.assertAlmostEqual(trajectory.states[-1, 0], math.exp(2.0), delta=1e-8)

    def test_diagonal_matches_exact(self):
        problem = CauchyProblem(np.diag([-1.0, -2.0]), [1.0, 1.0], 0.75, 2.0)
        numeric = solve_numeric(problem, 2000)
        exact = solve_exact(problem, numeric.times)
        self.assertLessEqual(np.max(np.abs(numeric.states - exact.states)), 1e-8)

    def test_times_follow_tau_grid(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 4.0)
        times = solve_numeric(problem, 4).times
        # tau_max = 4, so tau_k = k and t_k = (k / 2)^2
        np.testing.assert_allclose(times, [0.0, 0.25, 1.0, 2.25, 4.0], rtol=1e-14)

    def test_family_oracle(self):
        rng = np.random.default_rng(5)
        for index, a in enumerate(generator_family(count=8)):
            u0 = unit_vector(a.shape[0], rng)
            for alpha in (0.25, 0.5, 0.75, 1.0):
                with self.subTest(index=index, alpha=alpha):
                    problem = CauchyProblem(a, u0, alpha, 1.0)
                    numeric = solve_numeric(problem, 4096)
                    exact = solve_exact(problem, numeric.times[::64])
                    bound = 1e-7 * math.exp(np.linalg.norm(a) / alpha)
                    self.assertLessEqual(np.max(np.abs(numeric.states[::64] - exact.states)), bound)

    def test_fourth_order(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 1.0)
        reference = solve_exact(problem, [0.0, 1.0]).states[-1]
        errors = [np.linalg.norm(solve_numeric(problem, n).states[-1] - reference) for n in (20, 40)]
        self.assertTrue(12.0 <= errors[0] / errors[1] <= 20.0, errors)

    def test_steps_positive(self):
        with self.assertRaises(DomainError):
            solve_numeric(CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 1.0), 0)


# ---------------------------------------------------------------------------
# 4. TestResidualCheck
# ---------------------------------------------------------------------------
class TestResidualCheck(unittest.TestCase):
    """max ||D_alpha u - A u|| over interior samples."""

    def test_interpolant_reproduces_samples(self):
        trajectory = Trajectory([0.0, 1.0, 2.0, 3.0, 4.0], [[0.0], [1.0], [8.0], [27.0], [64.0]])
        interpolant = cubic_interpolant(trajectory)
        self.assertAlmostEqual(float(interpolant(2.0)[0]), 8.0, delta=1e-12)
        # cubic data is reproduced between samples too
        self.assertAlmostEqual(float(interpolant(2.5)[0]), 15.625, delta=1e-12)

    def test_interpolant_vector_states_uneven_times(self):
        times = np.array([0.0, 0.3, 1.1, 1.5, 2.6, 4.0])
        states = np.column_stack([times ** 2 - 1.0, 2.0 * times ** 3])
        interpolant = cubic_interpolant(Trajectory(times, states))
        for t in (0.7, 1.3, 3.3):
            with self.subTest(t=t):
                np.testing.assert_allclose(interpolant(t), [t ** 2 - 1.0, 2.0 * t ** 3], rtol=1e-12, atol=1e-12)

    def test_rotation_trajectory(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 1.0, 2.0)
        self.assertLessEqual(residual_check(problem, solve_exact(problem, rotation_times())), 1e-5)

    def test_fractional_rotation(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 0.5, 2.0)
        times = np.concatenate([[0.0], np.linspace(0.5, 2.0, 200)])
        self.assertLessEqual(residual_check(problem, solve_exact(problem, times)), 1e-3)

    def test_constant_trajectory(self):
        problem = CauchyProblem(np.zeros((2, 2)), [1.0, 2.0], 0.5, 1.0)
        trajectory = solve_exact(problem, np.linspace(0.0, 1.0, 20))
        self.assertLessEqual(residual_check(problem, trajectory), 1e-10)

    def test_corruption_detected(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 1.0, 2.0)
        clean = solve_exact(problem, rotation_times())
        states = clean.states.copy()
        states[100, 0] += 1.0
        self.assertGreaterEqual(residual_check(problem, Trajectory(clean.times, states)), 0.1)

    def test_too_few_samples(self):
        problem = CauchyProblem(ROTATION, [1.0, 0.0], 1.0, 2.0)
        trajectory = solve_exact(problem, [0.0, 0.5, 1.0, 1.5, 2.0])
        with self.assertRaises(InsufficientSamplesError):
            residual_check(problem, trajectory)

    def test_dimension_mismatch(self):
        problem = CauchyProblem([[1.0]], [1.0], 1.0, 2.0)
        trajectory = solve_exact(CauchyProblem(ROTATION, [1.0, 0.0], 1.0, 2.0), rotation_times())
        with self.assertRaises(DimensionError):
            residual_check(problem, trajectory)


if __name__ == '__main__':
    unittest.main()
