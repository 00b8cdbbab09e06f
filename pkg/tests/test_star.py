import unittest

import numpy as np

from wigner_matching.exceptions import DegreeOverflowException, TruncationException
from wigner_matching.phase import Hamiltonian, make_grid
from wigner_matching.phase.derivative import AnalyticBackend, FiniteDifferenceBackend
from wigner_matching.star import (BoppOperator, PolySymbol, check_associativity_identities,
                                  check_sign_convention, hamiltonian_piece, moyal_bracket, sandwich,
                                  star, star_left, star_poly, star_right, star_sampled, sym_bracket)


class PolySymbolTestCase(unittest.TestCase):
    def test_arithmetic(self):
        x, p = PolySymbol.x(), PolySymbol.p()
        h = PolySymbol.kinetic((1.0, 0.0, 2.0))
        self.assertEqual(h, p * p + 2.0 * x * x + 1.0)
        self.assertEqual(h.degree, 2)
        self.assertAlmostEqual(complex(h(1.0, 2.0)), 7.0)
        self.assertEqual(h.derivative(2, 0), PolySymbol.constant(4.0))
        self.assertEqual(h.derivative(3, 0), PolySymbol.constant(0.0))

    def test_json(self):
        a = PolySymbol.random(np.random.default_rng(3), 4)
        self.assertTrue(PolySymbol.from_json(a.to_json()).allclose(a, atol=0.0))

    def test_degree_limit(self):
        with self.assertRaises(DegreeOverflowException):
            PolySymbol.from_terms({(13, 0): 1.0})
        big = PolySymbol.from_terms({(7, 0): 1.0})
        with self.assertRaises(DegreeOverflowException):
            _ = big * big
        with self.assertRaises(DegreeOverflowException):
            BoppOperator.left(big)


class StarPolyTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.rng = np.random.default_rng(7)

    def test_canonical_pair(self):
        x, p = PolySymbol.x(), PolySymbol.p()
        self.assertTrue(star_poly(x, p).allclose(x * p + 0.5j))
        self.assertTrue(star_poly(p, x).allclose(x * p - 0.5j))
        self.assertTrue((star_poly(x, p) - star_poly(p, x)).allclose(PolySymbol.constant(1j)))
        self.assertTrue(moyal_bracket(x, p).allclose(PolySymbol.constant(0.5)))
        self.assertTrue(sym_bracket(x, p).allclose(x * p))

    def test_conjugate_product_reverses(self):
        a = PolySymbol.random(self.rng, 3)
        b = PolySymbol.random(self.rng, 4)
        self.assertTrue(star_poly(a, b, conjugate=True).allclose(star_poly(b, a), atol=1e-12))

    def test_associative(self):
        for _ in range(10):
            f, g, h = (PolySymbol.random(self.rng, 3) for _ in range(3))
            left = star_poly(star_poly(f, g), h)
            right = star_poly(f, star_poly(g, h))
            self.assertTrue(left.allclose(right, atol=1e-11))

    def test_associativity_identities(self):
        for _ in range(100):
            f, g, h = (PolySymbol.random(self.rng, 4) for _ in range(3))
            report = check_associativity_identities(f, g, h)
            self.assertLessEqual(report['max_residual'], 1e-12 * report['scale'] ** 3)
            self.assertLessEqual(report['jacobi'], report['max_residual'])

    def test_overflow(self):
        a = PolySymbol.from_terms({(6, 1): 1.0})
        with self.assertRaises(DegreeOverflowException):
            star_poly(a, a)


class BoppOperatorTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        rng = np.random.default_rng(11)
        self.a = PolySymbol.random(rng, 2)
        self.b = PolySymbol.random(rng, 3)
        self.f = PolySymbol.random(rng, 4)

    def test_left_and_right(self):
        self.assertTrue(BoppOperator.left(self.a).apply_poly(self.f).allclose(star_poly(self.a, self.f)))
        self.assertTrue(BoppOperator.right(self.a).apply_poly(self.f).allclose(star_poly(self.f, self.a)))
        self.assertTrue(BoppOperator.left(self.a, conjugate=True).apply_poly(self.f)
                        .allclose(star_poly(self.f, self.a)))

    def test_composition(self):
        op = BoppOperator.right(self.b).after(BoppOperator.left(self.a))
        expected = star_poly(star_poly(self.a, self.f), self.b)
        self.assertTrue(op.apply_poly(self.f).allclose(expected, atol=1e-11))
        self.assertEqual(op.order, self.a.degree + self.b.degree)

    def test_linear_combination(self):
        op = BoppOperator.left(self.a) - 2.0 * BoppOperator.right(self.b)
        expected = star_poly(self.a, self.f) - 2.0 * star_poly(self.f, self.b)
        self.assertTrue(op.apply_poly(self.f).allclose(expected))

    def test_sampled_application(self):
        grid = make_grid(-1.0, 1.0, -1.0, 1.0, 9, 9)
        f = self.f

        def source(m, n, xx, pp):
            return f.derivative(m, n)(xx, pp)

        sampled = f.sample(grid)
        backend = AnalyticBackend(source)
        expected = star_poly(star_poly(self.a, f), self.b).sample(grid)
        np.testing.assert_allclose(sandwich(self.a, sampled, self.b, backend).values, expected.values, atol=1e-11)
        np.testing.assert_allclose(star_left(self.a, sampled, backend).values,
                                   star_poly(self.a, f).sample(grid).values, atol=1e-12)
        np.testing.assert_allclose(star(sampled, self.a, backend).values,
                                   star_right(sampled, self.a, backend).values)


class SampledStarTestCase(unittest.TestCase):
    def setUp(self):
        super().setUp()
        self.grid = make_grid(-1.0, 1.0, -1.0, 1.0, 17, 17)
        self.backend = FiniteDifferenceBackend(6)
        self.f = PolySymbol.from_terms({(2, 1): 1.0, (0, 0): 0.5})
        self.g = PolySymbol.from_terms({(0, 2): 1.0, (1, 0): -1.0})

    def test_requires_order(self):
        with self.assertRaises(TruncationException):
            star_sampled(self.f.sample(self.grid), self.g.sample(self.grid), self.backend)
        with self.assertRaises(TruncationException):
            star(self.f.sample(self.grid), self.g.sample(self.grid), self.backend)

    def test_truncated_product_of_polynomials(self):
        product = star_sampled(self.f.sample(self.grid), self.g.sample(self.grid), self.backend, order=3)
        np.testing.assert_allclose(product.values, star_poly(self.f, self.g).sample(self.grid).values, atol=1e-9)


class SignConventionTestCase(unittest.TestCase):
    def test_self_test(self):
        self.assertLessEqual(check_sign_convention(), 1e-10)

    def test_kinetic_imaginary_part(self):
        # Im(p^2 * f) = -p df/dx for real f
        f = PolySymbol.from_terms({(3, 0): 1.0, (1, 1): 2.0})
        product = star_poly(PolySymbol.kinetic(), f)
        p = PolySymbol.p()
        expected = -1.0 * p * f.derivative(1, 0)
        self.assertTrue(PolySymbol(product.coefficients.imag).allclose(expected))

    def test_hamiltonian_piece(self):
        piece = hamiltonian_piece(Hamiltonian.step(2.0), 1, energy=3.0)
        self.assertEqual(piece, PolySymbol.kinetic() - 1.0)
        harmonic = hamiltonian_piece(Hamiltonian.harmonic(), 0, energy=1.0)
        self.assertEqual(harmonic, PolySymbol.from_terms({(0, 2): 1.0, (2, 0): 1.0, (0, 0): -1.0}))


if __name__ == '__main__':
    unittest.main()
