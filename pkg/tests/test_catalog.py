import math
import unittest

import numpy as np

from wigner_matching.catalog import (PointInteractionParams, build, jump_above, jump_below, jump_phase,
                                     list_entries, match_free_sho, point_bound, point_scatter, robin_phase,
                                     robin_scatter, step_amplitudes, step_scatter)
from wigner_matching.exceptions import (ConfigException, EnergyRangeException, NoBoundStateException,
                                        WignerMatchingException)
from wigner_matching.phase import make_grid


class RegistryTestCase(unittest.TestCase):
    def test_list_entries(self):
        ids = [entry['id'] for entry in list_entries()]
        self.assertEqual(ids, ['jump_above', 'jump_below', 'match_free_sho', 'point_bound', 'point_scatter',
                               'robin_bound', 'robin_scatter'])

    def test_build(self):
        (symbol,) = build('robin_scatter', k=1.0, L='inf')
        self.assertEqual(symbol.params['L'], math.inf)
        self.assertEqual(symbol.params['delta'], 0.0)
        left, right = build('jump_above', k=2.0, V0=1.0)
        self.assertEqual((left.domain, right.domain), ('x<0', 'x>0'))
        self.assertEqual(right.potential, (1.0,))

    def test_build_errors(self):
        with self.assertRaisesRegex(ConfigException, 'Unknown catalog entry'):
            build('harmonic')
        with self.assertRaisesRegex(ConfigException, 'parameter k is required'):
            build('robin_scatter', L=1.0)
        with self.assertRaisesRegex(ConfigException, 'unknown parameters'):
            build('robin_bound', L=1.0, k=2.0)
        with self.assertRaisesRegex(ConfigException, 'Point interaction parameter'):
            build('point_bound', alpha=-1.0, beta=1.0)
        with self.assertRaisesRegex(ConfigException, 'form'):
            build('robin_scatter', k=1.0, form='five_term')


class RobinTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-3.0, 0.0, -2.9, 3.1, 31, 31)

    def test_phase(self):
        self.assertAlmostEqual(robin_phase(1.0, 0.0), math.pi)
        self.assertEqual(robin_phase(1.0, math.inf), 0.0)
        self.assertAlmostEqual(robin_phase(2.0, 0.5), math.pi / 2.0)

    def test_forms_agree(self):
        for length in (0.0, 1.0, math.inf):
            three = robin_scatter(1.0, length).sample(self.grid)
            four = robin_scatter(1.0, length, 'four_term').sample(self.grid)
            np.testing.assert_allclose(three.values, four.values, atol=1e-12)

    def test_dirichlet_wall(self):
        symbol = robin_scatter(2.0, 0.0)
        p = self.grid.p
        np.testing.assert_allclose(symbol(np.zeros_like(p), p), 0.0, atol=1e-12)

    def test_removable_poles(self):
        symbol = robin_scatter(1.0, 1.0)
        x = np.array([-0.7])
        for p0 in (0.0, 1.0, -1.0):
            at_pole = complex(symbol(x, np.array([p0]))[0])
            nearby = 0.5 * complex(symbol(x, np.array([p0 + 2e-3]))[0] + symbol(x, np.array([p0 - 2e-3]))[0])
            self.assertTrue(math.isfinite(at_pole.real))
            self.assertAlmostEqual(at_pole, nearby, places=4)

    def test_invalid(self):
        with self.assertRaises(EnergyRangeException):
            robin_scatter(0.0, 1.0)
        with self.assertRaises(EnergyRangeException):
            build('robin_bound', L=-1.0)
        with self.assertRaisesRegex(WignerMatchingException, 'up to order 6'):
            robin_scatter(1.0, 1.0).d_x(7, 0.0, 0.0)


class PointInteractionTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.rng = np.random.default_rng(7)

    def test_determinant(self):
        with self.assertRaisesRegex(ConfigException, 'alpha\\*gamma - beta\\*delta = 1'):
            PointInteractionParams(1.0, 1.0, 1.0, 1.0)

    def test_delta_potential(self):
        params = PointInteractionParams.delta_potential(-2.0)
        self.assertAlmostEqual(params.bound_kappa(), 1.0)
        left, right = point_bound(params)
        self.assertAlmostEqual(left.energy, -1.0)
        self.assertAlmostEqual(left.params['ratio'], 1.0)
        t, r, _ = PointInteractionParams.delta_potential(3.0).scattering_data(1.5)
        self.assertAlmostEqual(t, 1.0 / (1.0 + 1j * 3.0 / 3.0))
        self.assertAlmostEqual(r, t - 1.0)

    def test_no_bound_state(self):
        self.assertIsNone(PointInteractionParams.free().bound_kappa())
        with self.assertRaises(NoBoundStateException):
            point_bound(PointInteractionParams.delta_potential(1.0))

    def test_unitarity(self):
        for _ in range(10):
            t, r, _ = PointInteractionParams.random(self.rng).scattering_data(1.0)
            self.assertLessEqual(abs(abs(t) ** 2 + abs(r) ** 2 - 1.0), 1e-12)

    def test_bound_ratio(self):
        for _ in range(10):
            params = PointInteractionParams.random(self.rng, bound=True)
            left, _ = point_bound(params)
            self.assertAlmostEqual(left.params['ratio'], left.params['ratio_check'], places=10)

    def test_free_limit(self):
        grid = make_grid(0.0, 3.0, -2.9, 3.1, 31, 31)
        params = PointInteractionParams.random(self.rng)
        t, r, _ = params.scattering_data(1.0)
        point = point_scatter(params, 1.0)
        step = step_scatter(1.0, 1.0, r, t)
        for a, b in zip(point, step):
            region = grid if a.domain == 'x>0' else make_grid(-3.0, 0.0, -2.9, 3.1, 31, 31)
            sa, sb = a.sample(region), b.sample(region)
            interior = ~(sa.mask | sb.mask)
            np.testing.assert_allclose(sa.values[interior], sb.values[interior], atol=1e-10)


class StepTestCase(unittest.TestCase):
    def test_amplitudes(self):
        r, t = step_amplitudes(2.0, math.sqrt(3.0))
        self.assertAlmostEqual(1.0 + r, t)
        self.assertAlmostEqual(abs(r) ** 2 + math.sqrt(3.0) / 2.0 * abs(t) ** 2, 1.0)

    def test_jump_phase_is_unimodular(self):
        self.assertAlmostEqual(abs(jump_phase(1.0, 2.0)), 1.0)

    def test_energy_ranges(self):
        with self.assertRaisesRegex(EnergyRangeException, 'use jump_above'):
            jump_below(2.0, 1.0)
        with self.assertRaisesRegex(EnergyRangeException, 'use jump_below'):
            jump_above(1.0, 2.0)
        with self.assertRaises(EnergyRangeException):
            jump_above(1.0, -1.0)

    def test_jump_below_is_continuous(self):
        left, right = jump_below(1.0, 2.0)
        p = np.linspace(-2.9, 3.1, 31)
        zero = np.zeros_like(p)
        np.testing.assert_allclose(left(zero, p), right(zero, p), atol=1e-10)

    def test_match_free_sho_is_continuous(self):
        left, right = match_free_sho()
        p = np.linspace(-2.9, 3.1, 31)
        zero = np.zeros_like(p)
        np.testing.assert_allclose(left(zero, p), right(zero, p), atol=1e-10)
        self.assertEqual(right.potential, (0.0, 0.0, 1.0))

    def test_exp_coefficients(self):
        left, _ = jump_above(2.0, 1.0)
        table = left.exp_coefficients(np.array([0.3, 0.7]))
        self.assertEqual(set(table), {(-1, 1), (1, -1), (-1, -1), (1, 1)})
        _, sho = match_free_sho()
        with self.assertRaises(WignerMatchingException):
            sho.exp_coefficients(np.array([0.3]))


if __name__ == '__main__':
    unittest.main()
