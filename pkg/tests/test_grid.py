import math
import unittest

import numpy as np

from wigner_matching.exceptions import GridException
from wigner_matching.phase import Hamiltonian, PhaseGrid, SampledSymbol, make_grid, norms


class PhaseGridTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-2.0, 2.0, -1.0, 1.0, 41, 21)

    def test_axes(self):
        self.assertEqual(self.grid.shape, (41, 21))
        self.assertAlmostEqual(self.grid.dx, 0.1)
        self.assertAlmostEqual(self.grid.x[0], -2.0)
        self.assertAlmostEqual(self.grid.x[-1], 2.0)
        self.assertAlmostEqual(self.grid.p[-1], 1.0)
        xx, pp = self.grid.mesh()
        self.assertEqual(xx.shape, self.grid.shape)
        self.assertTrue(np.all(xx[:, 0] == self.grid.x))
        self.assertTrue(np.all(pp[0, :] == self.grid.p))

    def test_refined(self):
        fine = self.grid.refined(2)
        self.assertEqual(fine.shape, (81, 41))
        self.assertAlmostEqual(fine.dx, self.grid.dx / 2)
        self.assertAlmostEqual(fine.x_max, self.grid.x_max)

    def test_json(self):
        self.assertEqual(PhaseGrid.from_json(self.grid.to_json()), self.grid)

    def test_invalid(self):
        with self.assertRaisesRegex(GridException, 'degenerate x-extent'):
            make_grid(1.0, 1.0, -1.0, 1.0, 16, 16)
        with self.assertRaisesRegex(GridException, 'degenerate p-extent'):
            make_grid(-1.0, 1.0, 0.0, 0.0, 16, 16)
        with self.assertRaisesRegex(GridException, 'reversed x bounds'):
            make_grid(1.0, -1.0, -1.0, 1.0, 16, 16)
        with self.assertRaisesRegex(GridException, 'undersized grid'):
            make_grid(-1.0, 1.0, -1.0, 1.0, 2, 16)
        with self.assertRaisesRegex(GridException, 'non-finite'):
            make_grid(-math.inf, 1.0, -1.0, 1.0, 16, 16)


class SampledSymbolTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-1.0, 1.0, -1.0, 1.0, 11, 11)

    def test_shape_mismatch(self):
        with self.assertRaises(GridException):
            SampledSymbol(self.grid, np.zeros((10, 11)))

    def test_arithmetic_merges_masks(self):
        mask = np.zeros(self.grid.shape, dtype=bool)
        mask[0, 0] = True
        a = SampledSymbol(self.grid, np.ones(self.grid.shape), mask)
        b = SampledSymbol.from_function(self.grid, lambda xx, pp: xx + 0 * pp)
        total = a + 2.0 * b
        self.assertTrue(total.mask[0, 0])
        self.assertAlmostEqual(total.values[-1, 3], 3.0)
        with self.assertRaises(GridException):
            _ = a + SampledSymbol(make_grid(-1.0, 1.0, -1.0, 1.0, 11, 12), np.zeros((11, 12)))

    def test_check_real(self):
        f = SampledSymbol.from_function(self.grid, lambda xx, pp: np.cos(xx) * pp)
        self.assertTrue(f.check_real())
        self.assertFalse((f * 1j + 1.0).check_real())

    def test_norms(self):
        f = SampledSymbol.from_function(self.grid, lambda xx, pp: np.exp(-(xx - 0.4) ** 2 - pp ** 2))
        stats = norms(f)
        self.assertAlmostEqual(stats['sup'], 1.0)
        x_at, p_at = stats['location_of_max']
        self.assertAlmostEqual(x_at, 0.4)
        self.assertAlmostEqual(p_at, 0.0)
        masked = f.with_mask(np.ones(self.grid.shape, dtype=bool))
        self.assertEqual(norms(masked)['sup'], 0.0)

    def test_l2_of_constant(self):
        f = SampledSymbol(self.grid, np.full(self.grid.shape, 2.0))
        expected = 2.0 * math.sqrt(11 * 11 * self.grid.dx * self.grid.dp)
        self.assertAlmostEqual(norms(f)['l2'], expected)


class HamiltonianTestCase(unittest.TestCase):
    def test_pieces(self):
        h = Hamiltonian.step(2.0)
        self.assertEqual(h.piece_index(-3.0, 0.0), 0)
        self.assertEqual(h.piece_index(0.0, 3.0), 1)
        self.assertEqual(h.piece_index(-1.0, 1.0), -1)
        self.assertEqual(h.potential(1), (2.0,))

    def test_invalid_pieces(self):
        with self.assertRaises(GridException):
            Hamiltonian([(-math.inf, 0.0, (0.0,)), (1.0, math.inf, (0.0,))])
        with self.assertRaises(GridException):
            Hamiltonian([(-math.inf, 1.0, (0.0,))])
        with self.assertRaises(GridException):
            Hamiltonian([(-math.inf, math.inf, (0.0, 0.0, 0.0, 1.0))])


if __name__ == '__main__':
    unittest.main()
