"""
Building blocks of closed-form Wigner functions.

Every entry is a sum of components analytic in p, so that removable
singularities can be evaluated by a circle mean in the complex p-plane:

* ExpTerm:  c(p) exp(r(p) x)
* ErfcTerm: c exp(b x^2 + a(p) x + c0(p)) erfc(s x + u0(p)), or without the erfc factor
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite, polynomial as npoly

from wigner_matching.exceptions import WignerMatchingException
from wigner_matching.phase import PhaseGrid, SampledSymbol
from wigner_matching.phase.derivative import AnalyticBackend
from wigner_matching.phase.special import circle_mean, erfcx

DOMAINS = ('x<0', 'x>0', 'all')
POLE_BAND = 1e-3
CIRCLE_RADIUS = 1e-2
MAX_X_ORDER = 6

logger = logging.getLogger(__name__)


def continued_conj(func: Callable) -> Callable:
    """p -> conj(func(conj(p))): the analytic continuation of conj(func(p)) from real p."""
    return lambda p: np.conj(func(np.conj(p)))


class ExpTerm(object):
    """
    c(p) exp(r(p) x). `key` = (s_p, s_c) tags which fundamental exponential the term
    multiplies: r = 2i(s_p p + s_c k) for oscillating terms, r = 2i s_p p + 2 s_c kappa
    for evanescent ones.
    """

    def __init__(self, coef: Callable, rate: Callable, key: Tuple[int, int], evanescent: bool = False):
        self.coef = coef
        self.rate = rate
        self.key = key
        self.evanescent = evanescent

    def d_x(self, n, x, p):
        r = self.rate(p)
        return self.coef(p) * r ** n * np.exp(r * x)

    def conjugate(self):
        key = (-self.key[0], self.key[1] if self.evanescent else -self.key[1])
        return ExpTerm(continued_conj(self.coef), continued_conj(self.rate), key, self.evanescent)

    def scaled(self, factor):
        coef = self.coef
        return ExpTerm(lambda p: factor * coef(p), self.rate, self.key, self.evanescent)


def oscillating_terms(sin_coef: Callable, cos_coef: Callable, freq: Callable, key: Tuple[int, int],
                      damping: float = 0.0):
    """
    exp(damping x) [a(p) sin(f(p) x) + b(p) cos(f(p) x)] as two ExpTerms with rates damping +- i f.
    A nonzero damping makes the pair evanescent; `key[1]` then carries its sign.
    """
    evanescent = damping != 0.0
    second_key = (-key[0], key[1] if evanescent else -key[1])
    return [
        ExpTerm(lambda p: sin_coef(p) / 2j + cos_coef(p) / 2.0, lambda p: damping + 1j * freq(p), key, evanescent),
        ExpTerm(lambda p: -sin_coef(p) / 2j + cos_coef(p) / 2.0, lambda p: damping - 1j * freq(p), second_key,
                evanescent),
    ]


def imag_terms(terms: Sequence[ExpTerm]) -> List[ExpTerm]:
    """Im{sum of terms} for real x and p, kept analytic in p."""
    out = []
    for term in terms:
        out.append(term.scaled(-0.5j))
        out.append(term.conjugate().scaled(0.5j))
    return out


def _rate_polynomials(b: float, order: int):
    """
    Coefficients, in r = 2 b x + a, of R_m with d^m/dx^m exp(b x^2 + a x) = R_m exp(...).
    R_{m+1} = r R_m + 2 b dR_m/dr.
    """
    polys = [np.array([1.0])]
    for _ in range(order):
        prev = polys[-1]
        nxt = np.zeros(len(prev) + 1)
        nxt[1:] += prev
        der = npoly.polyder(prev)
        nxt[:len(der)] += 2.0 * b * der
        polys.append(nxt)
    return polys


class ErfcTerm(object):
    """
    c exp(b x^2 + a(p) x + c0(p)) [erfc(s x + u0(p))]; the erfc factor is omitted when
    `s` is None. Evaluated as exp(Q - u^2) erfcx(u), which stays bounded where erfc grows.
    """

    def __init__(self, coef: complex, b: float, a: Callable, c0: Callable,
                 s: Optional[float] = None, u0: Optional[Callable] = None):
        self.coef = coef
        self.b = b
        self.a = a
        self.c0 = c0
        self.s = s
        self.u0 = u0
        self._polys = _rate_polynomials(b, MAX_X_ORDER)

    def d_x(self, n, x, p):
        a = self.a(p)
        q = self.b * x * x + a * x + self.c0(p)
        r = 2.0 * self.b * x + a
        if self.s is None:
            return self.coef * npoly.polyval(r, self._polys[n]) * np.exp(q)
        u = self.s * x + self.u0(p)
        total = npoly.polyval(r, self._polys[n]) * erfcx(u)
        for j in range(1, n + 1):
            herm = hermite.hermval(u, [0.0] * (j - 1) + [1.0])
            total = total + (math.comb(n, j) * npoly.polyval(r, self._polys[n - j])
                             * (-2.0 * self.s / math.sqrt(math.pi)) * (-self.s) ** (j - 1) * herm)
        return self.coef * np.exp(q - u * u) * total


class ClosedFormSymbol(object):
    """
    Catalog entry: a closed-form Wigner function on one side of the interface.

    Values follow the pi*rho convention unless `scale` says otherwise;
    `transform_scale` is the constant c with transform(psi) = c * entry.
    """

    def __init__(self, entry_id: str, params: dict, domain: str, energy: float, potential: Tuple[float, ...],
                 components: list, removable_poles=(), genuine_poles=(), real: bool = True,
                 scale: complex = 1.0, transform_scale: float = 1.0, wave=None, local_k: Optional[float] = None):
        if domain not in DOMAINS:
            raise WignerMatchingException(f'Unknown domain {domain!r}.')
        self.entry_id = entry_id
        self.params = dict(params)
        self.domain = domain
        self.energy = float(energy)
        self.potential = tuple(potential)
        self.components = list(components)
        self.genuine_poles = tuple(float(p0) for p0 in genuine_poles)
        self.removable_poles = tuple(float(p0) for p0 in removable_poles
                                     if all(abs(p0 - g) > CIRCLE_RADIUS for g in self.genuine_poles))
        self.real = real
        self.scale = scale
        self.transform_scale = transform_scale
        self.wave = wave
        self.local_k = local_k

    @property
    def name(self):
        return f'{self.entry_id}[{self.domain}]'

    @property
    def poles(self):
        return tuple(sorted(set(self.removable_poles + self.genuine_poles)))

    @property
    def local_energy(self):
        """E minus the constant potential of the piece, when the piece is free."""
        return self.energy - (self.potential[0] if self.potential else 0.0)

    def _raw(self, n, x, p):
        total = 0.0
        for component in self.components:
            total = total + component.d_x(n, x, p)
        return self.scale * total

    def d_x(self, n: int, x, p):
        """
        n-th x-derivative, 0 <= n <= 6; removable poles by circle mean, cells at
        genuine poles set to zero (and excluded by `exclusion_mask`)
        """
        if not 0 <= n <= MAX_X_ORDER:
            raise WignerMatchingException(f'Analytic x-derivatives are provided up to order {MAX_X_ORDER}.')
        x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            out = np.array(np.broadcast_to(self._raw(n, x, p), x.shape), dtype=complex)
            for p0 in self.removable_poles:
                near = np.abs(p - p0) < POLE_BAND
                if near.any():
                    xs = x[near][:, None]
                    out[near] = circle_mean(lambda q: self._raw(n, xs, q), p[near], CIRCLE_RADIUS)
            genuine = np.zeros(x.shape, dtype=bool)
            for p0 in self.genuine_poles:
                genuine |= np.abs(p - p0) < POLE_BAND
        out[genuine | ~np.isfinite(out)] = 0.0
        if self.real:
            out = out.real + 0j
        return out

    def __call__(self, x, p):
        return self.d_x(0, x, p)

    def derivative_source(self, a: int, b: int, xx, pp):
        if b:
            raise WignerMatchingException(f'{self.name} provides analytic x-derivatives only.')
        return self.d_x(a, xx, pp)

    def analytic_backend(self) -> AnalyticBackend:
        return AnalyticBackend(self.derivative_source, self.name)

    def domain_mask(self, grid: PhaseGrid):
        xx, _ = grid.mesh()
        if self.domain == 'x<0':
            return xx > 0.0
        if self.domain == 'x>0':
            return xx < 0.0
        return np.zeros(grid.shape, dtype=bool)

    def exclusion_mask(self, grid: PhaseGrid, band: float = POLE_BAND):
        _, pp = grid.mesh()
        mask = self.domain_mask(grid)
        for p0 in self.poles:
            mask = mask | (np.abs(pp - p0) < band)
        return mask

    def sample(self, grid: PhaseGrid, band: float = POLE_BAND) -> SampledSymbol:
        xx, pp = grid.mesh()
        return SampledSymbol(grid, self.d_x(0, xx, pp), self.exclusion_mask(grid, band),
                             real=self.real, label=self.name)

    def exp_coefficients(self, p) -> Dict[Tuple[int, int], np.ndarray]:
        """Summed coefficient of each fundamental exponential, keyed by ExpTerm.key."""
        p = np.asarray(p, dtype=float)
        table = {}
        with np.errstate(divide='ignore', invalid='ignore'):
            for component in self.components:
                if not isinstance(component, ExpTerm):
                    raise WignerMatchingException(f'{self.name} is not a finite sum of exponentials.')
                table[component.key] = table.get(component.key, 0.0) + self.scale * component.coef(p)
        return table

    def to_json(self):
        return {
            'id': self.entry_id,
            'domain': self.domain,
            'params': self.params,
            'energy': self.energy,
            'potential': list(self.potential),
            'removable_poles': list(self.removable_poles),
            'genuine_poles': list(self.genuine_poles),
        }

    def __repr__(self):
        return f'ClosedFormSymbol({self.name}, {self.params})'
