import logging
import math
import unittest

from fractions import Fraction

import mpmath

from amolab.exception import (InsufficientDepthException,
    DepthCapExceededException, PrecisionUnavailableException)
from amolab.frequency import *


logging.disable(logging.CRITICAL)
GOLDEN_Q = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]


def circular(a, b):
    d = abs(a - b) % 1.0

    return min(d, 1.0 - d)


class FrequencySpecTests(unittest.TestCase):

    def test_golden_denominators_are_fibonacci(self):
        self.assertEqual(GOLDEN_Q, denominators(golden(), 10))

    def test_silver_denominators(self):
        self.assertEqual([2, 5, 12, 29], denominators(silver(), 4))

    def test_explicit_spec_runs_out_of_depth(self):
        alpha = FrequencySpec([1, 2, 3])

        self.assertEqual(3, alpha.generated_depth)

        with self.assertRaises(InsufficientDepthException):
            alpha.denominator(5)

    def test_coefficients_below_one_are_rejected(self):
        with self.assertRaises(ValueError):
            FrequencySpec([1, 0, 2])

    def test_value_is_the_convergent(self):
        alpha = FrequencySpec([2, 3])

        self.assertEqual(Fraction(3, 7), alpha.value(2))

    def test_parse_frequency_shorthand(self):
        self.assertEqual('golden', parse_frequency('golden').kind)
        self.assertEqual((2, 2), silver([2, 2]).coefficients)
        self.assertEqual((1, 2, 3),
            parse_frequency('explicit:[1,2,3]').coefficients)

        liouville = parse_frequency('liouville:0.4')

        self.assertEqual('liouville', liouville.kind)
        self.assertEqual(0.4, liouville.target_beta)

    def test_parse_frequency_rejects_unknown_text(self):
        with self.assertRaises(ValueError):
            parse_frequency('bronze')

    def test_can_restore_spec_from_dict(self):
        alpha = liouville_spec(0.4)
        alpha.materialize(5)
        restored = FrequencySpec.from_dict(alpha.to_dict())

        self.assertEqual(alpha.coefficients, restored.coefficients)
        self.assertEqual(0.4, restored.target_beta)


class ConvergentTests(unittest.TestCase):

    def check_invariants(self, alpha, depth):
        for c in convergents(alpha, depth):
            p_prev = alpha.numerator(c.n - 1)
            q_prev = alpha.denominator(c.n - 1)

            self.assertEqual(1, abs(c.p * q_prev - p_prev * c.q))
            self.assertEqual(1, math.gcd(c.p, c.q))
            self.assertTrue(c.delta_lo <= c.delta <= c.delta_hi)
            self.assertTrue(Fraction(1, 2 * c.q_next) <= c.delta_lo)
            self.assertTrue(c.delta_hi <= Fraction(1, c.q_next))

    def test_golden_invariants_over_twenty_convergents(self):
        self.check_invariants(golden(), 20)

    def test_silver_invariants_over_twenty_convergents(self):
        self.check_invariants(silver(), 20)

    def test_explicit_invariants(self):
        self.check_invariants(FrequencySpec([3, 1, 4, 1, 5, 9, 2, 6, 5, 3,
            5, 8, 9, 7, 9, 3, 2, 3]), 15)

    def test_liouville_invariants_over_every_available_convergent(self):
        self.check_invariants(liouville_spec(0.4), 4)
        self.check_invariants(liouville_spec(1.0), 2)

    def test_convergent_needs_guard_coefficients(self):
        with self.assertRaises(InsufficientDepthException):
            convergents(FrequencySpec([1, 2, 3]), 3)

    def test_delta_matches_high_precision(self):
        with mpmath.workdps(50):
            alpha = (mpmath.sqrt(5) - 1) / 2

            for c in convergents(golden(), 15):
                exact = abs(c.q * alpha - c.p)
                self.assertTrue(mpmath.mpf(c.delta_lo.numerator) /
                    c.delta_lo.denominator <= exact * (1 + mpmath.mpf(10)**-30))
                self.assertTrue(exact <= mpmath.mpf(c.delta_hi.numerator) /
                    c.delta_hi.denominator * (1 + mpmath.mpf(10)**-30))

    def test_best_approximation_by_brute_force(self):
        for alpha in (golden(), silver()):
            reference = alpha.value(30)
            distances = [None]

            for q in range(1, 10**4):
                frac = (q * reference) % 1
                distances.append(min(frac, 1 - frac))

            n = 1

            while alpha.denominator(n + 1) <= 10**4:
                q_n, q_next = alpha.denominator(n), alpha.denominator(n + 1)
                delta = abs(q_n * reference - alpha.numerator(n))

                self.assertEqual(delta, distances[q_n])
                self.assertEqual(delta, min(distances[1:q_next]))
                n += 1

    def test_data_has_plot_columns(self):
        row = convergents(golden(), 3)[0].data

        self.assertEqual(['delta_hi', 'delta_lo', 'ln_ratio', 'n', 'p', 'q'],
            sorted(row))


class BetaTests(unittest.TestCase):

    def test_golden_beta_proxy_goes_to_zero(self):
        estimate = estimate_beta(golden(), 20)

        self.assertLess(estimate.proxy, 0.01)
        self.assertAlmostEqual(math.log(2), estimate.tail_sup(1), places=12)

    def test_running_sup_is_non_increasing(self):
        tail = estimate_beta(golden(), 20).running_sup_tail

        for a, b in zip(tail, tail[1:]):
            self.assertGreaterEqual(a, b)

    def test_estimate_needs_depth_three(self):
        with self.assertRaises(ValueError):
            estimate_beta(golden(), 2)

    def test_liouville_point_four_denominators(self):
        alpha = construct_liouville(0.4, 6)

        self.assertEqual((1, 2, 2, 3, 616), alpha.coefficients[:5])
        self.assertEqual([1, 3, 7, 24, 14791], denominators(alpha, 5))

    def test_liouville_point_four_proxy(self):
        estimate = beta_proxy(liouville_spec(0.4))

        self.assertEqual(5, estimate.depth)
        self.assertAlmostEqual(math.log(14791) / 24,
            estimate.per_n_values[3], places=12)
        self.assertLess(abs(estimate.proxy - 0.4), 1e-3)

    def test_liouville_one_reaches_four_coefficients(self):
        alpha = construct_liouville(1.0, 4)

        self.assertEqual([1, 4, 57], denominators(alpha, 3))
        self.assertLess(abs(estimate_beta(alpha, 3).proxy - 1.0), 0.05)
        self.assertEqual(4, achievable_depth(1.0))

    def test_unreachable_depth_names_achievable_depth(self):
        with self.assertRaises(DepthCapExceededException) as context:
            construct_liouville(0.4, 8)

        self.assertEqual(6, context.exception.achievable_depth)
        self.assertIn('achievable depth is 6', str(context.exception))

    def test_small_beta_reaches_deeper(self):
        alpha = construct_liouville(0.1, 10)

        self.assertEqual([1, 3, 4, 7, 11, 18, 29, 47, 170],
            denominators(alpha, 9))

    def test_non_positive_beta_is_rejected(self):
        with self.assertRaises(ValueError):
            liouville_spec(0.0)


class ReduceTests(unittest.TestCase):

    def test_large_n_matches_high_precision(self):
        n = 10**15
        result = reduce_mod_1(golden(), n)

        with mpmath.workdps(60):
            alpha = (mpmath.sqrt(5) - 1) / 2
            exact = float(mpmath.frac(n * alpha))

        self.assertLessEqual(circular(result.value, exact), result.error)
        self.assertLess(result.error, 1e-12)

    def test_negative_and_half_integer_n(self):
        with mpmath.workdps(40):
            alpha = mpmath.sqrt(2) - 1

            for n in (-7, Fraction(7, 2), Fraction(-13, 2), 12345):
                f = Fraction(n)
                exact = float(mpmath.frac(mpmath.mpf(f.numerator) /
                    f.denominator * alpha))
                value = reduce_mod_1(silver(), n).value

                self.assertLess(circular(value, exact), 1e-12)

    def test_zero_reduces_to_zero(self):
        self.assertEqual(Reduction(0.0, 0.0), reduce_mod_1(golden(), 0))

    def test_certifying_depth(self):
        self.assertEqual(11, certifying_depth(golden(), 100))

    def test_short_explicit_spec_cannot_certify(self):
        with self.assertRaises(PrecisionUnavailableException):
            reduce_mod_1(FrequencySpec([1, 1, 1]), 10)

    def test_precision_depth_must_exceed_bound(self):
        with self.assertRaises(PrecisionUnavailableException):
            reduce_mod_1(golden(), 10, precision_depth=5)

    def test_orbit_matches_pointwise_reduction(self):
        alpha = golden()
        values = orbit(alpha, -50, 100)

        for j, value in enumerate(values):
            self.assertLess(circular(value,
                reduce_mod_1(alpha, j - 50).value), 1e-12)

        self.assertTrue(((values >= 0.0) & (values < 1.0)).all())


if __name__ == '__main__':
    unittest.main()
