import cmath
import math
import unittest

import numpy as np

from wigner_matching.catalog import (PointInteractionParams, jump_above, match_free_sho, point_scatter, robin_bound,
                                     robin_scatter)
from wigner_matching.exceptions import NonFiniteException, WignerMatchingException
from wigner_matching.phase import SampledSymbol, make_grid
from wigner_matching.transform import (OffDiagonalPair, QuadratureSpec, Term, WaveFunction, cross_wigner, fit_scale,
                                       off_diagonal_wigner, phase_factor, wigner_of)
from wigner_matching.transform.quadrature import panel_nodes, richardson

SQRT_PI = math.sqrt(math.pi)


class TermTestCase(unittest.TestCase):
    def test_cosine_is_two_plane_waves(self):
        x = np.linspace(-2.0, 2.0, 9)
        total = sum(t(x) for t in Term.cosine(1.5, 0.3))
        np.testing.assert_allclose(total, np.cos(1.5 * x - 0.3), atol=1e-14)

    def test_derivative(self):
        term = Term.oscillator(1, coef=2.0)
        x = np.array([-1.0, 0.0, 0.5])
        np.testing.assert_allclose(term.derivative(x), 2.0 * (1.0 - x * x) * np.exp(-x * x / 2.0))

    def test_decays(self):
        self.assertTrue(Term.exponential(1.0).decays(1))
        self.assertFalse(Term.exponential(1.0).decays(-1))
        self.assertTrue(Term.gaussian().decays(-1))
        self.assertFalse(Term.plane(1.0).decays(1))

    def test_bound_state_must_decay(self):
        psi = WaveFunction([Term.plane(1.0)], [Term.exponential(1.0)], bound=True, label='bad')
        with self.assertRaisesRegex(WignerMatchingException, 'does not decay'):
            psi.check_decay()
        grid = make_grid(-1.0, 0.0, -1.0, 1.0, 8, 8)
        with self.assertRaises(WignerMatchingException):
            wigner_of(psi, grid)


class QuadratureTestCase(unittest.TestCase):
    def test_panel_nodes(self):
        nodes, weights = panel_nodes(0.0, 1.0, 0.25, 5)
        self.assertEqual(nodes.size, 20)
        self.assertAlmostEqual(float(np.sum(weights * nodes ** 5)), 1.0 / 6.0, places=14)
        empty, _ = panel_nodes(1.0, 1.0, 0.25, 5)
        self.assertEqual(empty.size, 0)

    def test_richardson(self):
        eps = (1e-4, 5e-5, 2.5e-5)
        values = [1.0 + 2.0 * e + 3.0 * e * e for e in eps]
        self.assertAlmostEqual(richardson(eps, values), 1.0, places=10)

    def test_settings(self):
        with self.assertRaisesRegex(WignerMatchingException, 'three positive epsilons'):
            QuadratureSpec(epsilons=(1e-4, 5e-5))
        with self.assertRaises(WignerMatchingException):
            QuadratureSpec(epsilons=(1e-4, 0.0, 2e-5))
        self.assertEqual(QuadratureSpec().refined(2).n_nodes, 40)


class GaussianWignerTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-3.0, 3.0, -3.0, 3.0, 13, 13)
        self.xx, self.pp = self.grid.mesh()

    def test_ground_state(self):
        symbol = wigner_of(WaveFunction.whole([Term.gaussian()]), self.grid)
        self.assertTrue(symbol.real)
        np.testing.assert_allclose(symbol.values, SQRT_PI * np.exp(-self.xx ** 2 - self.pp ** 2), atol=1e-10)

    def test_first_excited_state(self):
        symbol = wigner_of(WaveFunction.whole([Term.oscillator(1)]), self.grid)
        expected = SQRT_PI * np.exp(-self.xx ** 2 - self.pp ** 2) * (self.xx ** 2 + self.pp ** 2 - 0.5)
        np.testing.assert_allclose(symbol.values, expected, atol=1e-10)

    def test_unscaled(self):
        symbol = wigner_of(WaveFunction.whole([Term.gaussian()]), self.grid, QuadratureSpec(pi_scaled=False))
        np.testing.assert_allclose(symbol.values, np.exp(-self.xx ** 2 - self.pp ** 2) / SQRT_PI, atol=1e-10)

    def test_split_point_must_agree(self):
        first = WaveFunction([Term.gaussian()], [Term.gaussian()], split=0.0)
        second = WaveFunction([Term.gaussian()], [Term.gaussian()], split=1.0)
        with self.assertRaisesRegex(WignerMatchingException, 'split point'):
            cross_wigner(first, second, self.grid)


class CatalogTransformTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grids = {'x<0': make_grid(-3.0, 0.0, -2.9, 3.1, 31, 31), 'x>0': make_grid(0.0, 3.0, -2.9, 3.1, 31, 31)}
        self.grid = self.grids['x<0']

    def _relative_gap(self, symbol, fitted=False):
        grid = self.grids[symbol.domain]
        numeric = wigner_of(symbol.wave, grid)
        self.assertLessEqual(numeric.meta['max_spread'], QuadratureSpec().spread_tol)
        model = symbol.sample(grid)
        scale = fit_scale(numeric, model) if fitted or symbol.transform_scale is None else symbol.transform_scale
        interior = ~(numeric.mask | model.mask)
        gap = np.abs(numeric.values - scale * model.values)[interior]
        return float(np.max(gap)) / float(np.max(np.abs(numeric.values[interior])))

    def test_robin_bound(self):
        self.assertLessEqual(self._relative_gap(robin_bound(1.0)), 1e-6)

    def test_robin_scatter(self):
        symbol = robin_scatter(1.0, 1.0)
        self.assertEqual(symbol.transform_scale, -1.0)
        self.assertLessEqual(self._relative_gap(symbol), 1e-6)

    def test_jump_above_vanishing_at_split(self):
        # rho(0, p) = 0 for every p, so the x = 0 row carries only extrapolation noise
        symbols = jump_above(2.0, 1.0)
        self.assertLess(float(np.max(np.abs(symbols[0].sample(self.grid).values[-1]))), 1e-12)
        for symbol in symbols:
            self.assertLessEqual(self._relative_gap(symbol, fitted=True), 1e-6, msg=symbol.name)

    def test_point_scatter(self):
        for symbol in point_scatter(PointInteractionParams.delta_potential(3.0), 1.0):
            self.assertLessEqual(self._relative_gap(symbol, fitted=True), 1e-6, msg=symbol.name)

    def test_match_free_sho_both_sides(self):
        symbols = match_free_sho()
        self.assertEqual([symbol.domain for symbol in symbols], ['x<0', 'x>0'])
        for symbol in symbols:
            self.assertLessEqual(self._relative_gap(symbol, fitted=True), 1e-6, msg=symbol.name)

    def test_epsilon_stability(self):
        psi = jump_above(2.0, 1.0)[0].wave
        coarse = wigner_of(psi, self.grid, QuadratureSpec(epsilons=(1e-4, 5e-5, 2.5e-5)))
        fine = wigner_of(psi, self.grid, QuadratureSpec(epsilons=(5e-5, 2.5e-5, 1.25e-5)))
        self.assertTrue(coarse.meta['poles'])
        far = np.ones(self.grid.n_p, dtype=bool)
        for p0 in coarse.meta['poles']:
            far &= np.abs(self.grid.p - p0) >= QuadratureSpec().spread_band
        sup = float(np.max(np.abs(coarse.values)))
        gap = float(np.max(np.abs(coarse.values - fine.values)[:, far]))
        self.assertLessEqual(gap, QuadratureSpec().spread_tol * sup)


class QuadratureConvergenceTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-3.0, 3.0, -3.0, 3.0, 13, 13)
        self.pair = OffDiagonalPair(WaveFunction.whole([Term.oscillator(0)]), WaveFunction.whole([Term.oscillator(1)]),
                                    1.0, 3.0)

    def test_conjugate_pair_symmetry(self):
        for z in (0.0, 0.7, complex(1.0, -0.5)):
            forward = off_diagonal_wigner(self.pair, self.grid, z)
            backward = off_diagonal_wigner(self.pair.swapped(), self.grid, z)
            scale = float(np.max(np.abs(forward.values)))
            np.testing.assert_allclose(forward.values, np.conj(backward.values), atol=1e-13 * scale)

    def test_dense_oracle(self):
        rho = cross_wigner(self.pair.first, self.pair.second, self.grid)
        oracle = cross_wigner(self.pair.first, self.pair.second, self.grid, QuadratureSpec().refined(10))
        np.testing.assert_allclose(rho.values, oracle.values, atol=1e-8)

    def test_doubling_nodes(self):
        doubled = QuadratureSpec().refined(2)
        for symbol in match_free_sho():
            grid = make_grid(-3.0, 0.0, -2.9, 3.1, 16, 16) if symbol.domain == 'x<0' else \
                make_grid(0.0, 3.0, -2.9, 3.1, 16, 16)
            base = wigner_of(symbol.wave, grid)
            refined = wigner_of(symbol.wave, grid, doubled)
            scale = float(np.max(np.abs(base.values)))
            np.testing.assert_allclose(base.values, refined.values, atol=1e-8 * scale)


class PhaseFactorTestCase(unittest.TestCase):
    def test_real_time_is_unimodular(self):
        factor = phase_factor(1.0, 3.0, complex(0.7, 0.0))
        self.assertAlmostEqual(abs(factor), 1.0, places=14)
        self.assertAlmostEqual(factor, cmath.exp(2j * 0.7), places=14)

    def test_imaginary_time_damps(self):
        # z = t - i s with s = 1
        self.assertAlmostEqual(abs(phase_factor(1.0, 3.0, complex(0.0, -1.0))), math.exp(-4.0), places=14)

    def test_growth_rejected(self):
        with self.assertRaises(NonFiniteException):
            phase_factor(2.0, 2.0, complex(0.0, 10.0))

    def test_off_diagonal_at_zero_time(self):
        grid = make_grid(-2.0, 2.0, -2.0, 2.0, 9, 9)
        first = WaveFunction.whole([Term.oscillator(0)])
        second = WaveFunction.whole([Term.oscillator(1)])
        pair = OffDiagonalPair(first, second, 1.0, 3.0)
        rho = cross_wigner(first, second, grid)
        np.testing.assert_allclose(off_diagonal_wigner(pair, grid, 0.0).values, rho.values, atol=1e-14)
        moved = off_diagonal_wigner(pair, grid, complex(0.5, -0.25))
        np.testing.assert_allclose(moved.values, rho.values * phase_factor(1.0, 3.0, complex(0.5, -0.25)),
                                   atol=1e-13)
        self.assertEqual(moved.meta['z'], [0.5, -0.25])

    def test_pair_energies(self):
        psi = WaveFunction.whole([Term.gaussian()])
        with self.assertRaises(WignerMatchingException):
            OffDiagonalPair(psi, psi, math.nan, 1.0)


class FitScaleTestCase(unittest.TestCase):
    def test_recovers_scale(self):
        grid = make_grid(-1.0, 1.0, -1.0, 1.0, 9, 9)
        model = SampledSymbol.from_function(grid, lambda xx, pp: np.sin(xx + 2.0 * pp))
        self.assertAlmostEqual(fit_scale(model * 2.5, model), 2.5, places=12)
        with self.assertRaises(WignerMatchingException):
            fit_scale(model, model * 0.0)


if __name__ == '__main__':
    unittest.main()
