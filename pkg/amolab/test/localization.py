import logging
import math
import unittest
from unittest import mock

import numpy as np

from scipy.linalg import eigh_tridiagonal, eigvalsh

from amolab.exception import (BoxSizeException, ConvergenceException,
    NotLocalizedException)
from amolab.frequency import golden, liouville_spec, reduce_mod_1
from amolab.green import green_decay_rate
from amolab.localization import *
from amolab.operator import (Box, ModelParams, box_bands,
    box_hamiltonian, potential_values)


logging.disable(logging.CRITICAL)


def synthetic_pair(rate, center, size):
    sites = np.arange(size)
    vector = np.exp(-rate * np.abs(sites - center))
    vector /= np.linalg.norm(vector)

    return Eigenpair(0.0, vector, Box(0, size - 1), 0.0)


def interior_energies(params, box):
    """eigenvalues whose eigenvector peaks at least |I| / 10 from both ends"""
    diagonal, off = box_bands(params, box)
    energies, vectors = eigh_tridiagonal(diagonal, off)
    centers = np.argmax(np.abs(vectors), axis=0)
    margin = box.size // 10

    return energies[(centers >= margin) & (centers < box.size - margin)]


class EigenpairTests(unittest.TestCase):

    def test_participation_ratio(self):
        flat = Eigenpair(0.0, np.ones(4) / 2.0, Box(0, 3), 0.0)
        point = Eigenpair(0.0, np.array([0.0, 1.0, 0.0]), Box(5, 7), 0.0)

        self.assertAlmostEqual(4.0, flat.participation_ratio)
        self.assertAlmostEqual(1.0, point.participation_ratio)
        self.assertEqual(6, point.center)

    def test_value_log_outside_box(self):
        pair = synthetic_pair(1.0, 10, 21)

        self.assertEqual(-math.inf, pair.value_log(30))
        self.assertAlmostEqual(math.log(pair.vector[3]), pair.value_log(3))


class EigensolveTests(unittest.TestCase):

    def test_spectrum_matches_dense_eigenvalues(self):
        params = ModelParams(2.0, golden(), theta=0.3)
        box = Box(0, 59)
        dense = eigvalsh(box_hamiltonian(params, box).toarray())

        self.assertTrue(np.allclose(dense, spectrum(params, box)))

    def test_free_spectrum_is_the_cosine_band(self):
        size = 50
        params = ModelParams(0.0, golden(), theta=0.3)
        expected = np.sort(2.0 * np.cos(np.pi * np.arange(1, size + 1) /
            (size + 1)))

        self.assertTrue(np.allclose(expected, spectrum(params, Box(0,
            size - 1)), atol=1e-12))

    def test_interior_spectrum_does_not_depend_on_the_phase(self):
        params = ModelParams(3.0, golden(), theta=0.17)
        moved = params.with_theta(params.theta + reduce_mod_1(params.alpha,
            1).value)
        box = Box(0, 1999)
        first, second = spectrum(params, box), spectrum(moved, box)
        distance = max(
            np.max(np.min(np.abs(interior_energies(params, box)[:, None] -
                second[None, :]), axis=1)),
            np.max(np.min(np.abs(interior_energies(moved, box)[:, None] -
                first[None, :]), axis=1)))

        self.assertLessEqual(distance, 1e-2)

    def test_nearest_pairs_have_small_residuals(self):
        params = ModelParams(3.0, golden(), theta=0.31)
        box = Box(0, 399)
        pairs = eigensolve(params, box, 4, Selector('nearest', target=0.5))
        energies = spectrum(params, box)

        self.assertEqual(4, len(pairs))

        for pair in pairs:
            self.assertLessEqual(pair.residual, 1e-8)
            self.assertAlmostEqual(1.0, np.linalg.norm(pair.vector))
            self.assertTrue(80 <= pair.center - box.x1 <= 319)
            self.assertTrue(np.any(np.isclose(energies, pair.energy)))

        distances = [abs(pair.energy - 0.5) for pair in pairs]

        self.assertEqual(sorted(distances), distances)

    def test_central_and_localized_selectors(self):
        params = ModelParams(3.0, golden(), theta=0.31)
        box = Box(0, 599)
        central = eigensolve(params, box, 3, Selector('central'))
        localized = eigensolve(params, box, 3, Selector('localized'))

        self.assertEqual(3, len(central))
        self.assertEqual(3, len(localized))
        self.assertLessEqual(abs(central[0].center - 299.5), 60)
        self.assertGreaterEqual(localized[0].participation_ratio ** -1,
            localized[-1].participation_ratio ** -1)

    def test_all_rejected_pairs_raise(self):
        params = ModelParams(3.0, golden(), theta=0.31)

        with mock.patch('amolab.localization.RESIDUAL_TOLERANCE', -1.0):
            with self.assertRaises(ConvergenceException):
                eigensolve(params, Box(0, 99), 2)

    def test_unknown_selector(self):
        with self.assertRaises(ValueError):
            Selector('widest')

    def test_eigensolve_cap(self):
        with self.assertRaises(BoxSizeException):
            eigensolve(ModelParams(2.0, golden()), Box(0, 10**4), 1)


class TailTests(unittest.TestCase):

    def test_refined_tails_keep_decaying(self):
        params = ModelParams(3.0, golden(), theta=0.31)
        box = Box(0, 399)
        pair = eigensolve(params, box, 1, Selector('central'))[0]

        self.assertLess(pair.log_abs[0], -100.0)
        self.assertLess(pair.log_abs[-1], -100.0)

    def test_refined_tails_solve_the_eigen_equation(self):
        params = ModelParams(3.0, golden(), theta=0.31)
        box = Box(0, 399)
        pair = eigensolve(params, box, 1, Selector('central'))[0]
        shifted = pair.energy - potential_values(params, 0, box.size)
        c = pair.center
        la, s = pair.log_abs, pair.signs

        for i in list(range(1, c - 60)) + list(range(c + 60, box.size - 1)):
            total = s[i + 1] * math.exp(la[i + 1] - la[i]) + \
                s[i - 1] * math.exp(la[i - 1] - la[i])

            self.assertAlmostEqual(shifted[i] * s[i], total,
                delta=1e-8 * (1.0 + abs(shifted[i])))

    def test_flat_vectors_are_untouched(self):
        params = ModelParams(0.5, golden(), theta=0.1)
        vector = np.ones(30) / math.sqrt(30)
        log_abs, signs = refine_tails(params, Box(0, 29), 0.0, vector)

        self.assertTrue(np.allclose(np.log(vector), log_abs))
        self.assertTrue(np.all(signs == 1.0))


class DecayTests(unittest.TestCase):

    def test_fit_recovers_exponential_rate(self):
        pair = synthetic_pair(math.log(3.0), 200, 400)
        report = fit_decay(pair)

        self.assertAlmostEqual(math.log(3.0), report.fitted_rate, places=9)
        self.assertAlmostEqual(1.0, report.r_squared, places=9)
        self.assertAlmostEqual(math.log(3.0), report.max_window_rate,
            places=9)
        self.assertEqual(200, report.center)
        self.assertEqual(Box(40, 359), report.fit_window)
        self.assertIsNone(report.predicted_rate_floor)

    def test_planted_rates_are_recovered(self):
        for rate in np.linspace(0.1, 2.0, 20):
            report = fit_decay(synthetic_pair(float(rate), 200, 400))

            self.assertAlmostEqual(rate, report.fitted_rate, delta=1e-3)

    def test_boundary_peak_is_not_localized(self):
        with self.assertRaises(NotLocalizedException):
            fit_decay(synthetic_pair(1.0, 3, 200))

    def test_extended_vector_is_not_localized(self):
        vector = np.ones(100)
        vector[50] = 1.5
        pair = Eigenpair(0.0, vector / np.linalg.norm(vector), Box(0, 99),
            0.0)

        with self.assertRaises(NotLocalizedException):
            fit_decay(pair)

    def test_golden_decay_matches_log_lambda(self):
        params = ModelParams(3.0, golden(), theta=0.31)
        box = Box(0, 1999)
        pairs = eigensolve(params, box, 5, Selector('nearest', target=0.0))
        ln_lambda = math.log(3.0)

        self.assertEqual(5, len(pairs))

        for pair in pairs:
            report = fit_decay(pair)
            shifted = params.with_energy(pair.energy)
            exponent = lyapunov(shifted, 10**4, 8)
            start = pair.center + 50 if pair.center < box.middle else \
                pair.center - 650
            slope = green_decay_rate(shifted, Box(start, start + 600))

            self.assertTrue(0.9 * ln_lambda <= report.fitted_rate <=
                1.1 * ln_lambda)
            self.assertAlmostEqual(ln_lambda,
                report.predicted_rate_exact_beta0)

            for a, b in ((report.fitted_rate, exponent),
                         (report.fitted_rate, slope), (exponent, slope)):
                self.assertLessEqual(abs(a - b), 0.1 * max(a, b))

            row = report.row()

            self.assertEqual(3.0, row['lambda'])
            self.assertEqual(2000, row['box_size'])

    def test_liouville_decay_stays_above_the_floor(self):
        alpha = liouville_spec(0.4)
        params = ModelParams(math.e, alpha, theta=0.31)
        pairs = eigensolve(params, Box(0, 3999), 10, Selector('localized'))

        self.assertEqual(10, len(pairs))

        for pair in pairs:
            report = fit_decay(pair)

            self.assertLess(abs(report.beta_proxy - 0.4), 1e-3)
            self.assertEqual(14791, report.q_n)
            self.assertGreaterEqual(report.fitted_rate,
                1.0 - 1.5 * report.beta_proxy - 0.2)
            self.assertLessEqual(report.fitted_rate, 1.0 + 0.1)


class LyapunovTests(unittest.TestCase):

    def test_in_spectrum_exponent_is_log_lambda(self):
        params = ModelParams(2.0, golden(), theta=0.2)
        energies = spectrum(params, Box(0, 499))
        params = params.with_energy(energies[250])

        self.assertLess(abs(lyapunov(params, 2 * 10**4, 8) - math.log(2.0)),
            0.05)

    def test_exponent_is_at_least_log_lambda(self):
        for energy in (0.0, 5.0, 9.0):
            params = ModelParams(2.0, golden(), theta=0.2, energy=energy)

            self.assertGreaterEqual(lyapunov(params, 10**4, 4),
                math.log(2.0) - 0.02)

    def test_free_operator_has_zero_exponent(self):
        params = ModelParams(0.0, golden(), theta=0.2, energy=0.5)

        self.assertLess(lyapunov(params, 10**4, 4), 0.01)

    def test_exponent_tracks_the_coupling(self):
        exponents = {}

        for coupling in (3.0, 5.0):
            params = ModelParams(coupling, golden(), theta=0.31)
            energy = eigensolve(params, Box(0, 999), 1,
                Selector('central'))[0].energy
            exponents[coupling] = lyapunov(params.with_energy(energy),
                5 * 10**4, 8)

        self.assertLess(abs(exponents[3.0] - math.log(3.0)), 0.03)
        self.assertGreater(exponents[5.0], exponents[3.0])

    def test_short_runs_are_rejected(self):
        with self.assertRaises(ValueError):
            lyapunov(ModelParams(2.0, golden()), 100, 4)


if __name__ == '__main__':
    unittest.main()
