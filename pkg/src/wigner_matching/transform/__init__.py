"""
Wigner-Weyl transforms of piecewise wave functions.

    pi rho_12(x, p) = int dy exp(-2ipy) psi_1(x + y) conj(psi_2(x - y))

Wave functions are sums of analytic terms c x^m exp(a x + b x^2) on each side of a
split point; see `quadrature` for how the y-integral is organised.
"""
import cmath
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from wigner_matching.exceptions import NonFiniteException, WignerMatchingException
from wigner_matching.phase import PhaseGrid, SampledSymbol
from wigner_matching.transform.quadrature import transform_rows

MAX_PHASE_GROWTH = 1e12

logger = logging.getLogger(__name__)


class Term(object):
    """c x^m exp(a x + b x^2)"""

    def __init__(self, coef: complex = 1.0, power: int = 0, a: complex = 0.0, b: complex = 0.0):
        self.coef = complex(coef)
        self.power = int(power)
        self.a = complex(a)
        self.b = complex(b)

    @classmethod
    def plane(cls, k: float, coef: complex = 1.0):
        return cls(coef, a=1j * k)

    @classmethod
    def exponential(cls, kappa: float, coef: complex = 1.0):
        """c exp(-kappa x)"""
        return cls(coef, a=-kappa)

    @classmethod
    def cosine(cls, k: float, phase: float = 0.0, coef: complex = 1.0):
        """c cos(k x - phase) as two plane waves."""
        return [cls(coef / 2.0 * cmath.exp(-1j * phase), a=1j * k),
                cls(coef / 2.0 * cmath.exp(1j * phase), a=-1j * k)]

    @classmethod
    def gaussian(cls, coef: complex = 1.0):
        return cls(coef, b=-0.5)

    @classmethod
    def oscillator(cls, m: int, coef: complex = 1.0):
        """x^m exp(-x^2/2); m = 0, 1 are the two lowest oscillator states (E = 1, 3)."""
        return cls(coef, power=m, b=-0.5)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.coef * x ** self.power * np.exp(self.a * x + self.b * x * x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        poly = (self.a + 2.0 * self.b * x) * x ** self.power
        if self.power:
            poly = poly + self.power * x ** (self.power - 1)
        return self.coef * poly * np.exp(self.a * x + self.b * x * x)

    def decays(self, direction: int) -> bool:
        """True if the term vanishes as x -> direction * infinity."""
        if self.b.real < 0.0:
            return True
        if self.b != 0.0:
            return False
        return direction * self.a.real < 0.0

    def __repr__(self):
        return f'Term({self.coef:g} x^{self.power} exp({self.a:g} x + {self.b:g} x^2))'


def _evaluate(terms: Sequence[Term], x):
    total = np.zeros(np.shape(x), dtype=complex)
    for term in terms:
        total = total + term(x)
    return total


class WaveFunction(object):
    """psi = theta(split - x) psi_left + theta(x - split) psi_right"""

    def __init__(self, left: Sequence[Term], right: Sequence[Term], split: float = 0.0,
                 bound: bool = False, label: str = ''):
        self.left: List[Term] = list(left)
        self.right: List[Term] = list(right)
        self.split = float(split)
        self.bound = bound
        self.label = label

    @classmethod
    def whole(cls, terms: Sequence[Term], bound: bool = True, label: str = ''):
        return cls(terms, terms, 0.0, bound, label)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.split, _evaluate(self.left, x), _evaluate(self.right, x))

    def left_value(self, x):
        return _evaluate(self.left, x)

    def right_value(self, x):
        return _evaluate(self.right, x)

    def left_derivative(self, x):
        return sum((t.derivative(x) for t in self.left), np.zeros(np.shape(x), dtype=complex))

    def right_derivative(self, x):
        return sum((t.derivative(x) for t in self.right), np.zeros(np.shape(x), dtype=complex))

    def check_decay(self):
        """Reject parts that grow toward their open end."""
        for side, terms, direction in (('left', self.left, -1), ('right', self.right, 1)):
            for term in terms:
                if not term.decays(direction):
                    raise WignerMatchingException(
                        f'{self.label or "wave function"}: {side} term {term!r} does not decay, '
                        f'so it cannot describe a bound state.')

    def __repr__(self):
        return f'WaveFunction({self.label or (self.left, self.right)})'


class OffDiagonalPair(object):
    """Density matrix element |psi_1><psi_2| with energies E_1, E_2."""

    def __init__(self, first: WaveFunction, second: WaveFunction, e1: float, e2: float):
        if not (math.isfinite(e1) and math.isfinite(e2)):
            raise WignerMatchingException('Pair energies must be finite.')
        self.first = first
        self.second = second
        self.e1 = float(e1)
        self.e2 = float(e2)

    def swapped(self):
        return OffDiagonalPair(self.second, self.first, self.e2, self.e1)


class QuadratureSpec(object):
    """
    :param n_nodes: Gauss-Legendre nodes per panel
    :param panel_width: panel length in y
    :param envelope_tol: decaying tails are cut where the integrand envelope drops below this fraction of its peak
    :param epsilons: ladder of damping constants for the non-decaying cross terms
    :param head_length: length of the numerically integrated head of a non-decaying cross term
    :param spread_tol: tolerated extrapolation spread relative to the sup of the transform
    :param spread_band: half-width of the momentum bands around cross-term poles left out of the spread check
    :param pi_scaled: return pi * rho (the convention of the closed forms) instead of rho
    """

    def __init__(self, n_nodes: int = 20, panel_width: float = 0.25, envelope_tol: float = 1e-14,
                 epsilons=(1e-4, 5e-5, 2.5e-5), head_length: float = 2.0, spread_tol: float = 1e-4,
                 spread_band: float = 0.05, pi_scaled: bool = True, max_extent: float = 400.0):
        if len(epsilons) != 3 or not all(e > 0 for e in epsilons):
            raise WignerMatchingException('Exactly three positive epsilons are required.')
        self.n_nodes = int(n_nodes)
        self.panel_width = float(panel_width)
        self.envelope_tol = float(envelope_tol)
        self.epsilons = tuple(float(e) for e in epsilons)
        self.head_length = float(head_length)
        self.spread_tol = float(spread_tol)
        self.spread_band = float(spread_band)
        self.pi_scaled = pi_scaled
        self.max_extent = float(max_extent)

    def refined(self, factor: int = 2):
        return QuadratureSpec(self.n_nodes * factor, self.panel_width, self.envelope_tol, self.epsilons,
                              self.head_length, self.spread_tol, self.spread_band, self.pi_scaled,
                              self.max_extent)

    def to_json(self):
        return {'n_nodes': self.n_nodes, 'panel_width': self.panel_width, 'envelope_tol': self.envelope_tol,
                'epsilons': list(self.epsilons), 'head_length': self.head_length,
                'spread_tol': self.spread_tol, 'pi_scaled': self.pi_scaled}


def cross_wigner(first: WaveFunction, second: WaveFunction, grid: PhaseGrid,
                 quadrature: Optional[QuadratureSpec] = None, label: str = '') -> SampledSymbol:
    quadrature = quadrature or QuadratureSpec()
    if first.split != second.split:
        raise WignerMatchingException('Both wave functions must share the split point.')
    for psi in (first, second):
        if psi.bound:
            psi.check_decay()
    values, report = transform_rows(first, second, grid, quadrature)
    if not quadrature.pi_scaled:
        values = values / math.pi
    if not np.all(np.isfinite(values)):
        raise NonFiniteException(f'Wigner transform {label}')
    return SampledSymbol(grid, values, real=first is second, label=label, meta=report)


def wigner_of(psi: WaveFunction, grid: PhaseGrid, quadrature: Optional[QuadratureSpec] = None) -> SampledSymbol:
    """
    Wigner function of a single (piecewise) state
    :param psi: wave function
    :param grid: sampling grid
    :param quadrature: quadrature settings, `QuadratureSpec()` by default
    :return: pi * rho (or rho), with the epsilon-extrapolation report in `meta`
    """
    symbol = cross_wigner(psi, psi, grid, quadrature, label=f'W[{psi.label}]')
    # the diagonal transform is real up to quadrature round-off
    return SampledSymbol(grid, symbol.values.real, real=True, label=symbol.label, meta=symbol.meta)


def phase_factor(e1: float, e2: float, z: complex):
    """exp(-i (E_1 z - E_2 conj(z)))"""
    factor = cmath.exp(-1j * (e1 * z - e2 * z.conjugate()))
    if abs(factor) > MAX_PHASE_GROWTH or not cmath.isfinite(factor):
        raise NonFiniteException(f'complexified phase factor at z={z}')
    return factor


def off_diagonal_wigner(pair: OffDiagonalPair, grid: PhaseGrid, z: complex = 0.0,
                        quadrature: Optional[QuadratureSpec] = None) -> SampledSymbol:
    """rho_12(x, p) exp(-i (E_1 z - E_2 conj(z))) for complex time z = t - i s."""
    z = complex(z)
    factor = phase_factor(pair.e1, pair.e2, z)
    rho = cross_wigner(pair.first, pair.second, grid, quadrature,
                       label=f'W[{pair.first.label},{pair.second.label}]')
    return SampledSymbol(grid, rho.values * factor, rho.mask, label=rho.label,
                         meta=dict(rho.meta, z=[z.real, z.imag]))


def fit_scale(data: SampledSymbol, model: SampledSymbol) -> complex:
    """Least-squares c minimizing |data - c model| over cells unmasked in both."""
    use = ~(data.mask | model.mask)
    denom = np.vdot(model.values[use], model.values[use])
    if denom == 0:
        raise WignerMatchingException('Cannot fit a scale against a vanishing model.')
    return complex(np.vdot(model.values[use], data.values[use]) / denom)
