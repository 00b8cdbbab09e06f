import math
import unittest

import numpy as np

from wigner_matching.catalog import PointInteractionParams, jump_above, point_bound, robin_bound, robin_scatter
from wigner_matching.exceptions import PieceMismatchException, WignerMatchingException
from wigner_matching.phase import Hamiltonian, SampledSymbol, make_grid
from wigner_matching.phase.derivative import FiniteDifferenceBackend
from wigner_matching.star import PolySymbol
from wigner_matching.verifier import (ResidualReport, conjugate_form_residual, convergence_study, eigen_residual,
                                      harmonic_operator, imaginary_part_checks, long_form_operator,
                                      long_form_residual, long_form_terms, measured_orders,
                                      off_diagonal_sse_residual, prepare, quartic_free_residual, quartic_operator,
                                      reflection_conflict, sse_residual, star_eigen_star_operator)

SSE_TOL = 1e-10
EIGEN_FLOOR = 1e-2


def _left_grid():
    return make_grid(-3.0, 0.0, -2.9, 3.1, 31, 31)


def _right_grid():
    return make_grid(0.0, 3.0, -2.9, 3.1, 31, 31)


class StarEigenStarTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = _left_grid()
        self.free = Hamiltonian.free()

    def test_robin_scatter(self):
        for length in (0.0, 1.0, math.inf):
            rho = robin_scatter(1.0, length)
            sse = sse_residual(self.free, None, rho, self.grid)
            left, right = eigen_residual(self.free, None, rho, self.grid)
            self.assertLessEqual(sse.normalized, SSE_TOL, msg=f'L={length}')
            self.assertGreaterEqual(max(left.normalized, right.normalized), EIGEN_FLOOR, msg=f'L={length}')

    def test_brackets_of_real_symbol(self):
        left, _ = eigen_residual(PolySymbol.kinetic(), 4.0, robin_scatter(2.0, 0.0), self.grid)
        self.assertIn('moyal_bracket', left.extra)
        self.assertGreaterEqual(left.extra['moyal_bracket'], EIGEN_FLOOR)
        self.assertIn('sym_bracket', left.to_json())

    def test_robin_bound(self):
        rho = robin_bound(2.0)
        self.assertAlmostEqual(rho.energy, -0.25)
        self.assertLessEqual(sse_residual(self.free, None, rho, self.grid).normalized, SSE_TOL)

    def test_point_bound_both_regions(self):
        left, right = point_bound(PointInteractionParams.delta_potential(-2.0))
        self.assertLessEqual(sse_residual(self.free, None, left, self.grid).normalized, SSE_TOL)
        self.assertLessEqual(sse_residual(self.free, None, right, _right_grid()).normalized, SSE_TOL)

    def test_step_region(self):
        _, right = jump_above(2.0, 1.0)
        report = sse_residual(Hamiltonian.step(1.0), None, right, _right_grid())
        self.assertLessEqual(report.normalized, SSE_TOL)
        self.assertEqual(report.exclusions['domain'], 'x>0')

    def test_piece_mismatch(self):
        _, right = jump_above(2.0, 1.0)
        with self.assertRaises(PieceMismatchException):
            sse_residual(self.free, None, right, _right_grid())
        straddling = SampledSymbol(make_grid(-1.0, 1.0, -1.0, 1.0, 9, 9), np.zeros((9, 9)))
        with self.assertRaises(PieceMismatchException):
            sse_residual(Hamiltonian.step(1.0), 1.0, straddling)

    def test_equivalent_forms(self):
        rho = robin_scatter(1.0, 1.0)
        sse = sse_residual(self.free, None, rho, self.grid)
        quartic = quartic_free_residual(rho, k=1.0, grid=self.grid)
        conjugate = conjugate_form_residual(self.free, None, rho, self.grid)
        conjugate_right = conjugate_form_residual(self.free, None, rho, self.grid, side='right')
        off_diagonal = off_diagonal_sse_residual(self.free, 1.0, 1.0, rho, self.grid)
        for report in (quartic, conjugate, conjugate_right, off_diagonal):
            self.assertLessEqual(report.normalized, SSE_TOL, msg=report.name)
            np.testing.assert_allclose(report.residual.values, sse.residual.values, atol=1e-9 * sse.reference)

    def test_quartic_kappa(self):
        rho = robin_bound(1.0)
        self.assertLessEqual(quartic_free_residual(rho, kappa=1.0, grid=self.grid).normalized, SSE_TOL)
        with self.assertRaisesRegex(WignerMatchingException, 'Exactly one'):
            quartic_free_residual(rho, k=1.0, kappa=1.0, grid=self.grid)

    def test_reflection_conflict(self):
        report = reflection_conflict(1.0, robin_scatter(1.0, 0.0), self.grid)
        self.assertEqual(report['k'], 1.0)
        self.assertLessEqual(report['sse'], SSE_TOL)
        self.assertGreaterEqual(report['eigen'], EIGEN_FLOOR)
        self.assertIn('one_sided_minus', report)

    def test_imaginary_part(self):
        report = imaginary_part_checks(self.free, robin_scatter(1.0, 1.0), self.grid)
        self.assertGreaterEqual(report.normalized, EIGEN_FLOOR)


class OperatorIdentityTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.rng = np.random.default_rng(5)

    def test_quartic_operator(self):
        f = PolySymbol.random(self.rng, 5)
        sse = star_eigen_star_operator(PolySymbol.kinetic() - 2.0)
        self.assertTrue(quartic_operator(2.0).apply_poly(f).allclose(sse.apply_poly(f), atol=1e-11))

    def test_harmonic_operator(self):
        f = PolySymbol.random(self.rng, 5)
        sse = star_eigen_star_operator(PolySymbol.kinetic((0.0, 0.0, 1.0)) - 3.0)
        self.assertTrue(harmonic_operator(3.0).apply_poly(f).allclose(sse.apply_poly(f), atol=1e-10))

    def test_long_form_operator(self):
        for _ in range(5):
            potential = PolySymbol.from_terms({(m, 0): self.rng.uniform(-1.0, 1.0) for m in range(4)})
            energy = self.rng.uniform(-1.0, 2.0)
            f = PolySymbol.random(self.rng, 4, real=True)
            expected = star_eigen_star_operator(PolySymbol.kinetic() + potential - energy).apply_poly(f)
            self.assertTrue(long_form_operator(potential, energy).apply_poly(f).allclose(expected, atol=1e-10))

    def test_long_form_groups(self):
        terms = long_form_terms(PolySymbol.from_terms({(2, 0): 1.0}), 1.0)
        self.assertEqual(len(terms), 8)
        with self.assertRaisesRegex(WignerMatchingException, 'degree 4'):
            long_form_terms(PolySymbol.from_terms({(4, 0): 1.0}), 1.0)


class LongFormTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-4.0, 4.0, -4.0, 4.0, 33, 33)
        self.backend = FiniteDifferenceBackend(4)

    def test_matches_star_form(self):
        rho = SampledSymbol.from_function(
            self.grid, lambda xx, pp: np.cos(0.7 * xx - 1.1 * pp + 0.3) * np.exp(-(xx * xx + pp * pp) / 4.0),
            real=True)
        potential = PolySymbol.from_terms({(1, 0): 0.5, (3, 0): -0.2})
        long = long_form_residual(potential, 1.5, rho, backend=self.backend)
        sse = sse_residual(PolySymbol.kinetic() + potential, 1.5, rho, backend=self.backend)
        self.assertEqual(len(long.extra['terms']), 8)
        self.assertLessEqual(abs(long.sup - sse.sup), 1e-9 * sse.sup)

    def test_real_symbols_only(self):
        rho = SampledSymbol.from_function(self.grid, lambda xx, pp: np.exp(1j * xx) + 0 * pp)
        with self.assertRaisesRegex(WignerMatchingException, 'real symbols only'):
            long_form_residual(PolySymbol.constant(0.0), 1.0, rho, backend=self.backend)


class ReportTestCase(unittest.TestCase):
    def test_convergence_study(self):
        def evaluate(grid):
            residual = SampledSymbol(grid, np.full(grid.shape, grid.dx ** 2))
            return ResidualReport('synthetic', 'h2', residual, 1.0)

        report = convergence_study(evaluate, make_grid(0.0, 1.0, 0.0, 1.0, 11, 11), levels=3)
        self.assertEqual(len(report.convergence), 3)
        for order in report.extra['orders']:
            self.assertAlmostEqual(order, 2.0, places=8)
        self.assertTrue(report.extra['monotone'])
        self.assertEqual(report.residual.grid.nx, 41)

    def test_round_off_floor(self):
        orders = measured_orders([{'h': 0.1, 'norm': 1e-3}, {'h': 0.05, 'norm': 1e-14}])
        self.assertEqual(orders, [math.inf])

    def test_zero_reference(self):
        grid = make_grid(0.0, 1.0, 0.0, 1.0, 8, 8)
        report = ResidualReport('e', 'q', SampledSymbol(grid, np.full(grid.shape, 0.5)), 0.0)
        self.assertEqual(report.normalized, 0.5)
        self.assertEqual(report.name, 'e:q')

    def test_prepare_errors(self):
        with self.assertRaisesRegex(WignerMatchingException, 'grid is required'):
            prepare(robin_scatter(1.0, 1.0), None)
        with self.assertRaisesRegex(WignerMatchingException, 'Unsupported symbol type'):
            prepare(np.zeros((3, 3)), None)
        with self.assertRaisesRegex(WignerMatchingException, 'energy is required'):
            sse_residual(Hamiltonian.free(), None, PolySymbol.x(), make_grid(0.0, 1.0, 0.0, 1.0, 8, 8))


if __name__ == '__main__':
    unittest.main()
