"""
test_matrix_semigroup.py - Unit tests for matrix alpha-semigroups.

  1. TestMatrixExponential   - Pade scaling and squaring against closed forms and scipy
  2. TestSemigroupEvaluate   - T(0) = I, closed forms, alpha = 1 reduction
  3. TestSemigroupLaw        - T((s+t)^(1/alpha)) = T(s^(1/alpha)) T(t^(1/alpha))
  4. TestEstimateGenerator   - recovering A from the black-box family
  5. TestCommutation         - T^(alpha)(t) x = A T(t) x = T(t) A x
  6. TestStrongContinuity    - ||T(2^-k) x - x|| -> 0

Run from the project root:
    python -m unittest tests/test_matrix_semigroup.py -v
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import linalg

PROJECT_ROOT = Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(PROJECT_ROOT))

from fractional import AlphaOrder, DimensionError, DomainError, NoLimitError, NonFiniteError  # noqa: E402
from fractional.matrix_semigroup import (  # noqa: E402
    AlphaSemigroup, commutation_residual, estimate_generator, matrix_exponential,
    semigroup_evaluate, semigroup_law_residual, semigroup_law_tolerance, semigroup_series,
    strong_continuity_profile,
)
from fractional.properties import generator_family, unit_vector  # noqa: E402

ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])
NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])
ALPHAS = (0.25, 0.5, 0.75, 1.0)
GRID = (0.0, 0.1, 0.5, 1.0, 2.0, 4.0)


# ---------------------------------------------------------------------------
# 1. TestMatrixExponential
# ---------------------------------------------------------------------------
class TestMatrixExponential(unittest.TestCase):
    """exp(M) via [6/6] Pade with scaling and squaring."""

    def test_zero_gives_identity(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((2, 2))), np.eye(2))

    def test_quarter_rotation(self):
        theta = math.pi / 2
        result = matrix_exponential([[0.0, theta], [-theta, 0.0]])
        np.testing.assert_allclose(result, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-14)

    def test_diagonal(self):
        result = matrix_exponential(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(result, np.diag([math.e, math.exp(2.0)]), rtol=1e-13, atol=1e-15)

    def test_matches_scipy(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 3, 5, 8):
            for scale in (0.01, 0.4, 3.0, 10.0):
                with self.subTest(n=n, scale=scale):
                    m = rng.standard_normal((n, n))
                    m *= scale / np.linalg.norm(m, 1)
                    expected = linalg.expm(m)
                    np.testing.assert_allclose(matrix_exponential(m), expected, rtol=1e-12,
                                               atol=1e-12 * np.linalg.norm(expected))

    def test_overflow_reports_norm(self):
        with self.assertRaises(NonFiniteError) as ctx:
            matrix_exponential([[1000.0]])
        self.assertIn("1000", str(ctx.exception))

    def test_non_square(self):
        with self.assertRaises(DimensionError):
            matrix_exponential(np.ones((2, 3)))

    def test_non_finite_entries(self):
        with self.assertRaises(DomainError):
            matrix_exponential([[float('nan')]])


# ---------------------------------------------------------------------------
# 2. TestSemigroupEvaluate
# ---------------------------------------------------------------------------
class TestSemigroupEvaluate(unittest.TestCase):
    """T(t) = exp((t^alpha/alpha) A)."""

    def test_identity_at_zero(self):
        for a in generator_family(count=12):
            semigroup = AlphaSemigroup(a, 0.5)
            np.testing.assert_array_equal(semigroup_evaluate(semigroup, 0.0), np.eye(a.shape[0]))

    def test_scalar_half(self):
        # e^(2 sqrt(t) A) at t = 4
        value = semigroup_evaluate(AlphaSemigroup([[1.0]], 0.5), 4.0)
        self.assertAlmostEqual(value[0, 0] / math.exp(4.0), 1.0, delta=1e-14)

    def test_diagonal_classical(self):
        value = AlphaSemigroup(np.diag([-1.0, -2.0]), 1.0).evaluate(1.0)
        np.testing.assert_allclose(value, np.diag([math.exp(-1.0), math.exp(-2.0)]), rtol=1e-14)

    def test_alpha_one_is_classical_exponential(self):
        for a in generator_family(count=10):
            semigroup = AlphaSemigroup(a, 1.0)
            for t in GRID[1:]:
                self.assertTrue(np.array_equal(semigroup_evaluate(semigroup, t), matrix_exponential(t * a)))

    def test_series_agrees(self):
        a = np.array([[0.3, -0.2], [0.5, 0.1]])
        for alpha in ALPHAS:
            semigroup = AlphaSemigroup(a, alpha)
            for t in (0.2, 1.0, 1.7):
                with self.subTest(alpha=alpha, t=t):
                    np.testing.assert_allclose(semigroup_series(semigroup, t), semigroup.evaluate(t),
                                               rtol=1e-12, atol=1e-13)

    def test_negative_time(self):
        with self.assertRaises(DomainError):
            semigroup_evaluate(AlphaSemigroup(ROTATION, 0.5), -1.0)

    def test_generator_is_frozen(self):
        source = np.eye(2)
        semigroup = AlphaSemigroup(source, AlphaOrder(0.5))
        source[0, 0] = 5.0
        self.assertEqual(semigroup.generator[0, 0], 1.0)
        self.assertFalse(semigroup.generator.flags.writeable)
        self.assertEqual(semigroup.dimension, 2)

    def test_invalid_alpha(self):
        with self.assertRaises(DomainError):
            AlphaSemigroup(ROTATION, 0.0)


# ---------------------------------------------------------------------------
# 3. TestSemigroupLaw
# ---------------------------------------------------------------------------
class TestSemigroupLaw(unittest.TestCase):
    """The alpha-semigroup law."""

    def test_zero_times(self):
        self.assertEqual(semigroup_law_residual(AlphaSemigroup(ROTATION, 0.5), 0.0, 0.0), 0.0)

    def test_rotation_half(self):
        self.assertLessEqual(semigroup_law_residual(AlphaSemigroup(ROTATION, 0.5), 1.0, 2.0), 1e-10)

    def test_classical_law(self):
        for a in generator_family(count=20):
            semigroup = AlphaSemigroup(a, 1.0)
            self.assertLessEqual(semigroup_law_residual(semigroup, 1.0, 1.0),
                                 semigroup_law_tolerance(semigroup, 1.0, 1.0))

    def test_family_grid(self):
        for index, a in enumerate(generator_family(count=15)):
            for alpha in ALPHAS:
                semigroup = AlphaSemigroup(a, alpha)
                for s in GRID:
                    for t in GRID:
                        with self.subTest(index=index, alpha=alpha, s=s, t=t):
                            tolerance = semigroup_law_tolerance(semigroup, s, t)
                            self.assertLessEqual(semigroup_law_residual(semigroup, s, t), tolerance)

    def test_tolerance_follows_combined_operator(self):
        semigroup = AlphaSemigroup([[1.0]], 1.0)
        self.assertAlmostEqual(semigroup_law_tolerance(semigroup, 1.0, 1.0) / (1e-10 * math.exp(2.0)), 1.0,
                               delta=1e-12)

    def test_stable_generator_keeps_absolute_floor(self):
        # ||A||_F = 5 while ||T|| decays like e^(-5 tau / sqrt 2)
        semigroup = AlphaSemigroup(-5.0 / math.sqrt(2.0) * np.eye(2), 0.25)
        tolerance = semigroup_law_tolerance(semigroup, 4.0, 4.0)
        self.assertEqual(tolerance, 1e-10)
        self.assertLessEqual(semigroup_law_residual(semigroup, 4.0, 4.0), tolerance)

    def test_negative_argument(self):
        with self.assertRaises(DomainError):
            semigroup_law_residual(AlphaSemigroup(ROTATION, 0.5), -1.0, 1.0)


# ---------------------------------------------------------------------------
# 4. TestEstimateGenerator
# ---------------------------------------------------------------------------
class RotationBox:
    """A black-box family known only through evaluate(t)."""

    dimension = 2

    def __init__(self, alpha):
        self.alpha = AlphaOrder(alpha)

    def evaluate(self, t):
        tau = self.alpha.fractional_time(t)
        return np.array([[math.cos(tau), math.sin(tau)], [-math.sin(tau), math.cos(tau)]])


class SquareRootBox:
    """T(t) = [[1 + sqrt(tau)]]; its alpha-derivative blows up at 0."""

    dimension = 1
    alpha = AlphaOrder(1.0)

    def evaluate(self, t):
        return np.array([[1.0 + math.sqrt(t)]])


class TestEstimateGenerator(unittest.TestCase):
    """A = lim_{t->0+} T^(alpha)(t)."""

    def test_diagonal_half(self):
        estimate = estimate_generator(AlphaSemigroup(np.diag([1.0, 2.0]), 0.5))
        np.testing.assert_allclose(estimate, np.diag([1.0, 2.0]), atol=1e-4)

    def test_zero(self):
        estimate = estimate_generator(AlphaSemigroup(np.zeros((2, 2)), 0.5))
        np.testing.assert_allclose(estimate, np.zeros((2, 2)), atol=1e-12)

    def test_nilpotent(self):
        estimate = estimate_generator(AlphaSemigroup(NILPOTENT, 0.7))
        np.testing.assert_allclose(estimate, NILPOTENT, atol=1e-4)

    def test_custom_probes(self):
        probes = [[1.0, 1.0], [0.0, 1.0]]
        estimate = estimate_generator(AlphaSemigroup(np.diag([1.0, 2.0]), 0.5), probes=probes)
        np.testing.assert_allclose(estimate, np.diag([1.0, 2.0]), atol=1e-4)

    def test_probe_shape(self):
        with self.assertRaises(DimensionError):
            estimate_generator(AlphaSemigroup(ROTATION, 0.5), probes=[[1.0, 0.0]])

    def test_singular_probes(self):
        with self.assertRaises(DomainError) as ctx:
            estimate_generator(AlphaSemigroup(np.diag([1.0, 2.0]), 0.5), probes=[[1.0, 1.0], [1.0, 1.0]])
        self.assertIn("span", str(ctx.exception))

    def test_black_box(self):
        estimate = estimate_generator(RotationBox(0.6))
        np.testing.assert_allclose(estimate, ROTATION, atol=1e-4)

    def test_no_limit(self):
        with self.assertRaises(NoLimitError) as ctx:
            estimate_generator(SquareRootBox())
        self.assertIn("[0]", str(ctx.exception))

    def test_family_round_trip(self):
        for index, a in enumerate(generator_family(count=12)):
            for alpha in (0.5, 1.0):
                with self.subTest(index=index, alpha=alpha):
                    estimate = estimate_generator(AlphaSemigroup(a, alpha))
                    self.assertLessEqual(np.linalg.norm(estimate - a), 1e-3 * max(1.0, np.linalg.norm(a)))


# ---------------------------------------------------------------------------
# 5. TestCommutation
# ---------------------------------------------------------------------------
class TestCommutation(unittest.TestCase):
    """D_alpha T(t)x, A T(t)x and T(t)Ax agree."""

    def test_zero_generator(self):
        for residual in commutation_residual(AlphaSemigroup(np.zeros((2, 2)), 0.5), 1.0, [1.0, 2.0]):
            self.assertLessEqual(residual, 1e-9)

    def test_diagonal(self):
        for residual in commutation_residual(AlphaSemigroup(np.diag([-1.0, 3.0]), 0.5), 1.0, [1.0, 1.0]):
            self.assertLessEqual(residual, 1e-6)

    def test_rotation(self):
        for residual in commutation_residual(AlphaSemigroup(ROTATION, 0.8), 2.0, [1.0, 0.0]):
            self.assertLessEqual(residual, 1e-6)

    def test_family(self):
        rng = np.random.default_rng(3)
        for index, a in enumerate(generator_family(count=12)):
            x = unit_vector(a.shape[0], rng)
            for alpha in ALPHAS:
                semigroup = AlphaSemigroup(a, alpha)
                for t in (0.5, 1.0, 2.0):
                    with self.subTest(index=index, alpha=alpha, t=t):
                        bound = 1e-5 * semigroup.growth_factor(t)
                        self.assertLessEqual(max(commutation_residual(semigroup, t, x)), bound)

    def test_time_must_be_positive(self):
        with self.assertRaises(DomainError):
            commutation_residual(AlphaSemigroup(ROTATION, 0.5), 0.0, [1.0, 0.0])

    def test_state_dimension(self):
        with self.assertRaises(DimensionError):
            commutation_residual(AlphaSemigroup(ROTATION, 0.5), 1.0, [1.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# 6. TestStrongContinuity
# ---------------------------------------------------------------------------
class TestStrongContinuity(unittest.TestCase):
    """c0 property along t = 2^-k."""

    def test_monotone_to_zero(self):
        rng = np.random.default_rng(11)
        for index, a in enumerate(generator_family(count=12)):
            norm = np.linalg.norm(a)
            bounded = a / norm if norm > 1.0 else a
            profile = strong_continuity_profile(AlphaSemigroup(bounded, 1.0), unit_vector(a.shape[0], rng))
            with self.subTest(index=index):
                self.assertEqual(len(profile), 21)
                self.assertTrue(np.all(np.diff(profile) <= 0))
                self.assertLess(profile[-1], 1e-6)

    def test_fractional_order_still_tends_to_zero(self):
        profile = strong_continuity_profile(AlphaSemigroup(ROTATION, 0.5), [1.0, 0.0], k_max=40)
        self.assertTrue(np.all(np.diff(profile) <= 0))
        self.assertLess(profile[-1], 1e-5)


if __name__ == '__main__':
    unittest.main()
