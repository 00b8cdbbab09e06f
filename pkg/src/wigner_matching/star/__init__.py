"""
Moyal star product with terminating Bopp-shift expansions.

For polynomial A the product with any smooth f is a finite differential operator:

    A * f = sum_n (i/2)^n / n! sum_j C(n, j) (-1)^j (dx^(n-j) dp^j A) (dp^(n-j) dx^j f)

which is A(x + (i/2) dp, p - (i/2) dx) f. The right product f * A swaps the roles,
and the conjugate product flips the sign of i.
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from wigner_matching.exceptions import DegreeOverflowException, TruncationException, WignerMatchingException
from wigner_matching.phase import Hamiltonian, PhaseGrid, SampledSymbol, make_grid
from wigner_matching.phase.derivative import AnalyticBackend

MAX_DEGREE = 12
MAX_OPERATOR_DEGREE = 6

logger = logging.getLogger(__name__)


class PolySymbol(object):
    """Polynomial sum_{m,n} c[m, n] x^m p^n with complex coefficients."""

    def __init__(self, coefficients):
        c = np.atleast_2d(np.asarray(coefficients, dtype=complex))
        if c.ndim != 2:
            raise WignerMatchingException('PolySymbol coefficients must form a 2-D table.')
        nonzero = np.argwhere(c != 0)
        degree = int(nonzero.sum(axis=1).max()) if len(nonzero) else 0
        if degree > MAX_DEGREE:
            raise DegreeOverflowException(degree, MAX_DEGREE)
        self.degree = degree
        size = degree + 1
        table = np.zeros((size, size), dtype=complex)
        rows, cols = min(c.shape[0], size), min(c.shape[1], size)
        table[:rows, :cols] = c[:rows, :cols]
        self.coefficients = table

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int], complex]):
        degree = max((m + n for m, n in terms), default=0)
        if degree > MAX_DEGREE:
            raise DegreeOverflowException(degree, MAX_DEGREE)
        c = np.zeros((degree + 1, degree + 1), dtype=complex)
        for (m, n), value in terms.items():
            c[m, n] += value
        return cls(c)

    @classmethod
    def constant(cls, value):
        return cls([[value]])

    @classmethod
    def x(cls):
        return cls.from_terms({(1, 0): 1.0})

    @classmethod
    def p(cls):
        return cls.from_terms({(0, 1): 1.0})

    @classmethod
    def kinetic(cls, potential=(0.0,)):
        """p**2 + c0 + c1 x + c2 x**2 for a potential coefficient tuple."""
        terms = {(0, 2): 1.0}
        for m, value in enumerate(potential):
            terms[(m, 0)] = terms.get((m, 0), 0.0) + value
        return cls.from_terms(terms)

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, real: bool = False):
        terms = {}
        for m in range(degree + 1):
            for n in range(degree + 1 - m):
                value = rng.uniform(-1.0, 1.0)
                if not real:
                    value = value + 1j * rng.uniform(-1.0, 1.0)
                terms[(m, n)] = value
        return cls.from_terms(terms)

    @property
    def is_constant(self):
        return self.degree == 0

    def max_abs_coefficient(self):
        return float(np.max(np.abs(self.coefficients)))

    def __call__(self, x, p):
        return npoly.polyval2d(x, p, self.coefficients)

    def sample(self, grid: PhaseGrid, label: str = '') -> SampledSymbol:
        xx, pp = grid.mesh()
        return SampledSymbol(grid, np.broadcast_to(self(xx, pp), grid.shape), label=label or repr(self))

    def derivative(self, a: int, b: int):
        """Exact d^a/dx^a d^b/dp^b."""
        c = self.coefficients
        if a > self.degree or b > self.degree:
            return PolySymbol.constant(0.0)
        if a:
            c = npoly.polyder(c, a, axis=0)
        if b:
            c = npoly.polyder(c, b, axis=1)
        return PolySymbol(c)

    def _padded(self, other, size=None):
        size = size or max(self.coefficients.shape[0], other.coefficients.shape[0])
        a = np.zeros((size, size), dtype=complex)
        b = np.zeros((size, size), dtype=complex)
        a[:self.coefficients.shape[0], :self.coefficients.shape[1]] = self.coefficients
        b[:other.coefficients.shape[0], :other.coefficients.shape[1]] = other.coefficients
        return a, b

    def __add__(self, other):
        other = _as_poly(other)
        a, b = self._padded(other)
        return PolySymbol(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        a, b = self._padded(other)
        return PolySymbol(a - b)

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __neg__(self):
        return PolySymbol(-self.coefficients)

    def __mul__(self, other):
        """Pointwise (commutative) product."""
        if isinstance(other, PolySymbol):
            if self.degree + other.degree > MAX_DEGREE:
                raise DegreeOverflowException(self.degree + other.degree, MAX_DEGREE)
            return PolySymbol(convolve2d(self.coefficients, other.coefficients))
        return PolySymbol(self.coefficients * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return PolySymbol(self.coefficients / scalar)

    def conj(self):
        return PolySymbol(np.conj(self.coefficients))

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            return False
        a, b = self._padded(other)
        return bool(np.array_equal(a, b))

    def allclose(self, other, atol: float = 1e-12):
        a, b = self._padded(_as_poly(other))
        return bool(np.max(np.abs(a - b)) <= atol)

    def to_json(self):
        return {f'{m},{n}': [float(v.real), float(v.imag)]
                for (m, n), v in np.ndenumerate(self.coefficients) if v != 0}

    @classmethod
    def from_json(cls, data):
        terms = {}
        for key, (re, im) in data.items():
            m, n = (int(s) for s in key.split(','))
            terms[(m, n)] = complex(re, im)
        return cls.from_terms(terms)

    def __repr__(self):
        terms = [f'({v:g})x^{m}p^{n}' for (m, n), v in np.ndenumerate(self.coefficients) if v != 0]
        return 'PolySymbol(' + (' + '.join(terms) or '0') + ')'


def _as_poly(value):
    return value if isinstance(value, PolySymbol) else PolySymbol.constant(value)


def _star_terms(degree: int, conjugate: bool = False):
    """(n, j, weight) of the terminating expansion; weight = (+-i/2)^n / n! C(n, j) (-1)^j."""
    unit = -0.5j if conjugate else 0.5j
    for n in range(degree + 1):
        for j in range(n + 1):
            yield n, j, unit ** n / math.factorial(n) * math.comb(n, j) * (-1) ** j


def star_poly(a: PolySymbol, b: PolySymbol, conjugate: bool = False) -> PolySymbol:
    """
    Exact star product of two polynomials
    :param a: left factor
    :param b: right factor
    :param conjugate: use the conjugate product (sign of i flipped)
    :return: a * b
    """
    if a.degree + b.degree > MAX_DEGREE:
        raise DegreeOverflowException(a.degree + b.degree, MAX_DEGREE)
    result = PolySymbol.constant(0.0)
    for n, j, weight in _star_terms(min(a.degree, b.degree), conjugate):
        result = result + weight * (a.derivative(n - j, j) * b.derivative(j, n - j))
    return result


class BoppOperator(object):
    """
    Finite differential operator sum_k c_k(x, p) dx^a_k dp^b_k with polynomial
    coefficients; `terms` maps (a, b) to the coefficient PolySymbol.
    """

    def __init__(self, terms: Dict[Tuple[int, int], PolySymbol]):
        self.terms = {key: value for key, value in terms.items() if np.any(value.coefficients != 0)}

    @classmethod
    def left(cls, a: PolySymbol, conjugate: bool = False):
        """Operator of f -> a * f, i.e. a(x + (i/2) dp, p - (i/2) dx)."""
        _check_operator_degree(a)
        terms = {}
        for n, j, weight in _star_terms(a.degree, conjugate):
            key = (j, n - j)
            terms[key] = terms.get(key, PolySymbol.constant(0.0)) + weight * a.derivative(n - j, j)
        return cls(terms)

    @classmethod
    def right(cls, a: PolySymbol, conjugate: bool = False):
        """Operator of f -> f * a, i.e. a(x - (i/2) dp, p + (i/2) dx)."""
        _check_operator_degree(a)
        terms = {}
        for n, j, weight in _star_terms(a.degree, conjugate):
            key = (n - j, j)
            terms[key] = terms.get(key, PolySymbol.constant(0.0)) + weight * a.derivative(j, n - j)
        return cls(terms)

    @property
    def order(self):
        return max((a + b for a, b in self.terms), default=0)

    def after(self, inner):
        """Composition self o inner, expanded with the Leibniz rule."""
        terms = {}
        for (a, b), outer_coef in self.terms.items():
            for (a1, b1), inner_coef in inner.terms.items():
                for i in range(a + 1):
                    for j in range(b + 1):
                        coef = inner_coef.derivative(a - i, b - j)
                        if coef.is_constant and coef.coefficients[0, 0] == 0:
                            continue
                        key = (a1 + i, b1 + j)
                        piece = (math.comb(a, i) * math.comb(b, j)) * (outer_coef * coef)
                        terms[key] = terms.get(key, PolySymbol.constant(0.0)) + piece
        return BoppOperator(terms)

    def __add__(self, other):
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, PolySymbol.constant(0.0)) + value
        return BoppOperator(terms)

    def __mul__(self, scalar):
        return BoppOperator({key: value * scalar for key, value in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    def apply(self, f: SampledSymbol, backend, label: str = '') -> SampledSymbol:
        xx, pp = f.grid.mesh()
        total = np.zeros(f.grid.shape, dtype=complex)
        mask = f.mask.copy()
        for (a, b), coef in sorted(self.terms.items()):
            values, partial_mask = backend.partial(f, a, b)
            total += coef(xx, pp) * values
            mask |= partial_mask
        return SampledSymbol(f.grid, total, mask, label=label or f.label)

    def apply_poly(self, f: PolySymbol) -> PolySymbol:
        result = PolySymbol.constant(0.0)
        for (a, b), coef in self.terms.items():
            result = result + coef * f.derivative(a, b)
        return result

    def __repr__(self):
        return f'BoppOperator({sorted(self.terms)})'


def _check_operator_degree(a: PolySymbol):
    if a.degree > MAX_OPERATOR_DEGREE:
        raise DegreeOverflowException(a.degree, MAX_OPERATOR_DEGREE)


def star_left(a: PolySymbol, f: SampledSymbol, backend, conjugate: bool = False) -> SampledSymbol:
    """
    a * f for polynomial a
    :param a: polynomial of degree <= 6
    :param f: sampled symbol, resolvable by `backend` up to order deg(a)
    :param backend: derivative backend
    :param conjugate: use the conjugate product
    """
    return BoppOperator.left(a, conjugate).apply(f, backend)


def star_right(f: SampledSymbol, a: PolySymbol, backend, conjugate: bool = False) -> SampledSymbol:
    """f * a for polynomial a"""
    return BoppOperator.right(a, conjugate).apply(f, backend)


def sandwich(a: PolySymbol, f: SampledSymbol, b: PolySymbol, backend) -> SampledSymbol:
    """(a * f) * b as a single composed operator on f."""
    return BoppOperator.right(b).after(BoppOperator.left(a)).apply(f, backend)


def star_sampled(f: SampledSymbol, g: SampledSymbol, backend, order: Optional[int] = None) -> SampledSymbol:
    """
    Star product of two sampled symbols truncated at total derivative order `order`
    :raises TruncationException: if no truncation order is given
    """
    if order is None:
        raise TruncationException()
    if f.grid != g.grid:
        raise WignerMatchingException('Both factors must be sampled on the same grid.')
    total = np.zeros(f.grid.shape, dtype=complex)
    mask = f.mask | g.mask
    for n, j, weight in _star_terms(order):
        df, mask_f = backend.partial(f, n - j, j)
        dg, mask_g = backend.partial(g, j, n - j)
        total += weight * df * dg
        mask |= mask_f | mask_g
    return SampledSymbol(f.grid, total, mask)


def star(f, g, backend=None, order: Optional[int] = None):
    """Dispatch on the argument kinds; sampled * sampled needs an explicit order."""
    if isinstance(f, PolySymbol) and isinstance(g, PolySymbol):
        return star_poly(f, g)
    if isinstance(f, PolySymbol):
        return star_left(f, g, backend)
    if isinstance(g, PolySymbol):
        return star_right(f, g, backend)
    return star_sampled(f, g, backend, order)


def sym_bracket(f, g, backend=None, order: Optional[int] = None):
    """(f, g) = (f * g + g * f) / 2"""
    return (star(f, g, backend, order) + star(g, f, backend, order)) * 0.5


def moyal_bracket(f, g, backend=None, order: Optional[int] = None):
    """[f, g] = (f * g - g * f) / 2i"""
    return (star(f, g, backend, order) - star(g, f, backend, order)) * (-0.5j)


def check_associativity_identities(f: PolySymbol, g: PolySymbol, h: PolySymbol):
    """
    Evaluate the three bracket identities that encode associativity:
    [[f,g],h] + cyclic = 0, [(f,g),h] + ([h,f],g) + ([h,g],f) = 0 and [(f,g),h] + cyclic = 0
    :return: dict of max residual coefficient per identity plus the input scale
    """
    s, m = sym_bracket, moyal_bracket
    jacobi = m(m(f, g), h) + m(m(g, h), f) + m(m(h, f), g)
    mixed = m(s(f, g), h) + s(m(h, f), g) + s(m(h, g), f)
    cyclic = m(s(f, g), h) + m(s(g, h), f) + m(s(h, f), g)
    scale = max(f.max_abs_coefficient(), g.max_abs_coefficient(), h.max_abs_coefficient())
    report = {
        'jacobi': jacobi.max_abs_coefficient(),
        'mixed': mixed.max_abs_coefficient(),
        'cyclic': cyclic.max_abs_coefficient(),
        'scale': scale,
    }
    report['max_residual'] = max(report['jacobi'], report['mixed'], report['cyclic'])
    return report


def check_sign_convention(backend=None, grid: Optional[PhaseGrid] = None):
    """
    Assert Im(p^2 * f) = -p df/dx on the real field f = sin(x + p/2) exp(-x^2/8) cos(p)
    :raises WignerMatchingException: if the identity fails
    """
    grid = grid or make_grid(-3.0, 3.0, -2.0, 2.0, 16, 16)

    def field(a, b, xx, pp):
        # the kinetic left product never asks for p-derivatives
        if b:
            raise WignerMatchingException('sign self-test uses x-derivatives only')
        phase = xx + pp / 2.0
        g = np.exp(-xx ** 2 / 8.0)
        dg = -xx / 4.0 * g
        d2g = (xx ** 2 / 16.0 - 0.25) * g
        s, c = np.sin(phase), np.cos(phase)
        if a == 0:
            v = s * g
        elif a == 1:
            v = c * g + s * dg
        else:
            v = -s * g + 2.0 * c * dg + s * d2g
        return v * np.cos(pp)

    backend = backend or AnalyticBackend(field, 'sign-test')
    f = SampledSymbol.from_function(grid, lambda xx, pp: field(0, 0, xx, pp), real=True)
    product = star_left(PolySymbol.kinetic(), f, backend)
    dfdx, _ = backend.partial(f, 1, 0)
    _, pp = grid.mesh()
    error = float(np.max(np.abs(product.values.imag + pp * dfdx.real)))
    if error > 1e-10 * max(1.0, float(np.max(np.abs(product.values)))):
        raise WignerMatchingException(f'Star product sign self-test failed (error {error:.3e}).')
    logger.debug(f'Star product sign self-test passed (error {error:.3e})')
    return error


def hamiltonian_piece(h: Hamiltonian, idx: int, energy: float = 0.0) -> PolySymbol:
    """Local polynomial H - E on one piece of a piecewise Hamiltonian."""
    return PolySymbol.kinetic(h.potential(idx)) - energy
