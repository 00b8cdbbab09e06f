"""
Closed-form Wigner functions for contact interactions and the matched free|oscillator state.

All entries use hbar = 1, 2m = 1 (so E = k**2) and the pi * rho normalisation.
Entries displayed only "up to a multiplicative constant" carry transform_scale=None.
"""
import cmath
import logging
import math
from typing import Optional

import numpy as np

from wigner_matching.catalog.symbols import ClosedFormSymbol, ErfcTerm, ExpTerm, imag_terms, oscillating_terms
from wigner_matching.exceptions import (ConfigException, EnergyRangeException, NoBoundStateException,
                                        ResonanceException)
from wigner_matching.phase.special import faddeeva
from wigner_matching.transform import Term, WaveFunction

DETERMINANT_TOL = 1e-12
ROOT_IMAG_TOL = 1e-12
SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

logger = logging.getLogger(__name__)


def _require_positive(name: str, value: float):
    if not (math.isfinite(value) and value > 0.0):
        raise EnergyRangeException(f'{name} must be positive and finite, got {value}.')


def robin_phase(k: float, length: float) -> float:
    """delta_k in [0, 2pi) from k L = cot(delta_k / 2); L = inf (Neumann) gives 0."""
    if math.isinf(length):
        return 0.0
    return 2.0 * math.atan2(1.0, k * length)


def robin_scatter(k: float, length: float, form: str = 'three_term') -> ClosedFormSymbol:
    """
    Scattering state off a Robin wall psi(0) = L psi'(0), on x < 0:

        sin[2(p-k)x]/(p-k) + sin[2(p+k)x]/(p+k) + 2 cos(2kx - delta) sin(2px)/p

    :param k: wave number, > 0
    :param length: Robin length L; 0 is Dirichlet, math.inf is Neumann
    :param form: 'three_term' or 'four_term' (the same function regrouped)
    """
    _require_positive('k', k)
    delta = robin_phase(k, length)
    e_plus, e_minus = cmath.exp(1j * delta), cmath.exp(-1j * delta)
    if form == 'three_term':
        components = [
            ExpTerm(lambda p: 1.0 / (2j * (p - k)) + e_plus / (2j * p), lambda p: 2j * (p - k), (1, -1)),
            ExpTerm(lambda p: -1.0 / (2j * (p - k)) - e_minus / (2j * p), lambda p: -2j * (p - k), (-1, 1)),
            ExpTerm(lambda p: 1.0 / (2j * (p + k)) + e_minus / (2j * p), lambda p: 2j * (p + k), (1, 1)),
            ExpTerm(lambda p: -1.0 / (2j * (p + k)) - e_plus / (2j * p), lambda p: -2j * (p + k), (-1, -1)),
        ]
    elif form == 'four_term':
        # sin[2(p-k)x]/(p-k) + sin[2(p+k)x]/(p+k) + sin[2(p-k)x + delta]/p + sin[2(p+k)x - delta]/p
        cos_d, sin_d = math.cos(delta), math.sin(delta)
        components = (
            oscillating_terms(lambda p: 1.0 / (p - k) + cos_d / p, lambda p: sin_d / p,
                              lambda p: 2.0 * (p - k), (1, -1))
            + oscillating_terms(lambda p: 1.0 / (p + k) + cos_d / p, lambda p: -sin_d / p,
                                lambda p: 2.0 * (p + k), (1, 1)))
    else:
        raise ConfigException(f'Unknown robin_scatter form {form!r}.')
    wave = WaveFunction([Term.plane(k), Term.plane(-k, e_plus)], [], label=f'robin_scatter(k={k}, L={length})')
    return ClosedFormSymbol('robin_scatter', {'k': k, 'L': length, 'delta': delta, 'form': form}, 'x<0',
                            k * k, (0.0,), components, removable_poles=(0.0, k, -k),
                            transform_scale=-1.0, wave=wave, local_k=k)


def robin_bound(length: float) -> ClosedFormSymbol:
    """-(2/L) sin(2px) exp(2x/L) / p on x < 0, bound state of energy -1/L**2."""
    _require_positive('L', length)
    kappa = 1.0 / length
    components = [
        ExpTerm(lambda p: 1j * kappa / p, lambda p: 2j * p + 2.0 * kappa, (1, 1), evanescent=True),
        ExpTerm(lambda p: -1j * kappa / p, lambda p: -2j * p + 2.0 * kappa, (-1, 1), evanescent=True),
    ]
    wave = WaveFunction([Term(math.sqrt(2.0 * kappa), a=kappa)], [], bound=True, label=f'robin_bound(L={length})')
    return ClosedFormSymbol('robin_bound', {'L': length}, 'x<0', -kappa * kappa, (0.0,), components,
                            removable_poles=(0.0,), wave=wave, local_k=kappa)


class PointInteractionParams(object):
    """
    Matching conditions of a general point interaction at x = 0:

        -psi_+'(0) - alpha psi_-'(0) = beta psi_-(0)
        -delta psi_-'(0) - gamma psi_-(0) = psi_+(0)
    """

    def __init__(self, alpha: float, beta: float, gamma: float, delta: float):
        self.alpha, self.beta, self.gamma, self.delta = (float(v) for v in (alpha, beta, gamma, delta))
        det = self.alpha * self.gamma - self.beta * self.delta
        if abs(det - 1.0) > DETERMINANT_TOL:
            raise ConfigException(f'Point interaction needs alpha*gamma - beta*delta = 1, got {det!r}.')

    @classmethod
    def delta_potential(cls, g: float):
        """Delta potential g delta(x): (alpha, beta, gamma, delta) = (-1, -g, -1, 0)."""
        return cls(-1.0, -g, -1.0, 0.0)

    @classmethod
    def free(cls):
        return cls(-1.0, 0.0, -1.0, 0.0)

    @classmethod
    def random(cls, rng: np.random.Generator, bound: bool = False, attempts: int = 1000):
        """Random admissible parameters; with `bound` only ones carrying a bound state."""
        for _ in range(attempts):
            alpha = rng.uniform(0.5, 2.0) * rng.choice((-1.0, 1.0))
            beta, delta = rng.uniform(-1.0, 1.0, size=2)
            params = cls(alpha, beta, (1.0 + beta * delta) / alpha, delta)
            if not bound or params.bound_kappa() is not None:
                return params
        raise NoBoundStateException()

    def bound_kappa(self) -> Optional[float]:
        """Smallest kappa > 0 with beta + delta kappa**2 + (alpha + gamma) kappa = 0, or None."""
        linear = self.alpha + self.gamma
        if self.delta == 0.0:
            roots = [] if linear == 0.0 else [-self.beta / linear]
        else:
            roots = [r.real for r in np.roots([self.delta, linear, self.beta]) if abs(r.imag) <= ROOT_IMAG_TOL]
        positive = sorted(r for r in roots if r > 0.0)
        return positive[0] if positive else None

    def scattering_data(self, k: float):
        """(T, R, D) for the plane wave exp(ikx) incident from the left."""
        d = -self.beta + self.delta * k * k + 1j * k * (self.alpha + self.gamma)
        if d == 0:
            raise ResonanceException(k)
        return -2j * k / d, (self.beta + self.delta * k * k + 1j * k * (self.alpha - self.gamma)) / d, d

    def to_json(self):
        return {'alpha': self.alpha, 'beta': self.beta, 'gamma': self.gamma, 'delta': self.delta}

    def __repr__(self):
        return f'PointInteractionParams({self.alpha!r}, {self.beta!r}, {self.gamma!r}, {self.delta!r})'


def point_bound(params: PointInteractionParams):
    """
    Bound state psi_-(x) = exp(kappa x), psi_+(x) = r exp(-kappa x) of a point interaction
    :return: (entry on x < 0, entry on x > 0)
    """
    kappa = params.bound_kappa()
    if kappa is None:
        raise NoBoundStateException()
    r = params.alpha + params.beta / kappa
    left = [
        ExpTerm(lambda p: -(1.0 / p - r / (p - 1j * kappa)) / 2j, lambda p: 2.0 * kappa + 2j * p, (1, 1), True),
        ExpTerm(lambda p: (1.0 / p - r / (p + 1j * kappa)) / 2j, lambda p: 2.0 * kappa - 2j * p, (-1, 1), True),
    ]
    right = [
        ExpTerm(lambda p: r * (r / p - 1.0 / (p + 1j * kappa)) / 2j, lambda p: -2.0 * kappa + 2j * p, (1, -1), True),
        ExpTerm(lambda p: -r * (r / p - 1.0 / (p - 1j * kappa)) / 2j, lambda p: -2.0 * kappa - 2j * p, (-1, -1),
                True),
    ]
    wave = WaveFunction([Term(1.0, a=kappa)], [Term(r, a=-kappa)], bound=True, label='point_bound')
    meta = dict(params.to_json(), kappa=kappa, ratio=r, ratio_check=-params.gamma - params.delta * kappa)
    energy = -kappa * kappa
    return (ClosedFormSymbol('point_bound', meta, 'x<0', energy, (0.0,), left, removable_poles=(0.0,),
                             wave=wave, local_k=kappa),
            ClosedFormSymbol('point_bound', meta, 'x>0', energy, (0.0,), right, removable_poles=(0.0,),
                             wave=wave, local_k=kappa))


def point_scatter(params: PointInteractionParams, k: float):
    """
    Scattering state exp(ikx) + R exp(-ikx) | T exp(ikx) in the compact forms

        -pi rho(x<0) = Im{((1-T)/(p-k) + R/p) e^{2i(p-k)x} + (|R|^2/(p+k) + (1-T) conj(R)/p) e^{2i(p+k)x}}
        -pi rho(x>0) = Im{((1-T) conj(T)/(p-k) + R conj(T)/p) e^{2i(p-k)x}}

    :return: (entry on x < 0, entry on x > 0)
    """
    _require_positive('k', k)
    t, r, d = params.scattering_data(k)
    left = imag_terms([
        ExpTerm(lambda p: (1.0 - t) / (p - k) + r / p, lambda p: 2j * (p - k), (1, -1)),
        ExpTerm(lambda p: abs(r) ** 2 / (p + k) + (1.0 - t) * r.conjugate() / p, lambda p: 2j * (p + k), (1, 1)),
    ])
    right = imag_terms([
        ExpTerm(lambda p: (1.0 - t) * t.conjugate() / (p - k) + r * t.conjugate() / p, lambda p: 2j * (p - k),
                (1, -1)),
    ])
    wave = WaveFunction([Term.plane(k), Term.plane(-k, r)], [Term.plane(k, t)], label=f'point_scatter(k={k})')
    meta = dict(params.to_json(), k=k, T=[t.real, t.imag], R=[r.real, r.imag], D=[d.real, d.imag])
    return (ClosedFormSymbol('point_scatter', meta, 'x<0', k * k, (0.0,), [c.scaled(-1.0) for c in left],
                             removable_poles=(-k,), genuine_poles=(0.0, k), wave=wave, local_k=k),
            ClosedFormSymbol('point_scatter', meta, 'x>0', k * k, (0.0,), [c.scaled(-1.0) for c in right],
                             genuine_poles=(0.0, k), wave=wave, local_k=k))


def jump_phase(k: float, v0: float) -> complex:
    """exp(i alpha) = (ik + kappa) / (ik - kappa), kappa = sqrt(V0 - k**2)."""
    kappa = math.sqrt(v0 - k * k)
    return (1j * k + kappa) / (1j * k - kappa)


def jump_below(k: float, v0: float):
    """
    Step V0 theta(x) below the barrier: psi_- = cos(kx - alpha/2), psi_+ = cos(alpha/2) exp(-kappa x)
    :return: (entry on x < 0, entry on x > 0), both up to a common constant
    """
    _require_positive('k', k)
    if k * k >= v0:
        raise EnergyRangeException(f'jump_below needs k**2 < V0, got k={k}, V0={v0}; use jump_above.')
    kappa = math.sqrt(v0 - k * k)
    half_alpha = math.atan2(kappa, -k)
    kk = kappa * kappa

    def d_minus(p):
        return kk + (2.0 * p - k) ** 2

    def d_plus(p):
        return kk + (2.0 * p + k) ** 2

    left = (
        oscillating_terms(lambda p: -k * (k * (2.0 * p - k) + kk) / (d_minus(p) * 4.0 * p * (p - k)),
                          lambda p: kappa * k / (2.0 * p * d_minus(p)),
                          lambda p: 2.0 * (p - k), (1, -1))
        + oscillating_terms(lambda p: -k * (k * (2.0 * p + k) - kk) / (d_plus(p) * 4.0 * p * (p + k)),
                            lambda p: -kappa * k / (2.0 * p * d_plus(p)),
                            lambda p: 2.0 * (p + k), (1, 1)))
    right = oscillating_terms(lambda p: k * k * (k * k + kk - 4.0 * p * p) / (p * d_plus(p) * d_minus(p)),
                              lambda p: 4.0 * kappa * k * k / (d_plus(p) * d_minus(p)),
                              lambda p: 2.0 * p, (1, -1), damping=-2.0 * kappa)
    wave = WaveFunction(Term.cosine(k, half_alpha), [Term(math.cos(half_alpha), a=-kappa)],
                        label=f'jump_below(k={k}, V0={v0})')
    phase = jump_phase(k, v0)
    params = {'k': k, 'V0': v0, 'kappa': kappa, 'alpha': 2.0 * half_alpha, 'phase': [phase.real, phase.imag]}
    energy = k * k
    return (ClosedFormSymbol('jump_below', params, 'x<0', energy, (0.0,), left, removable_poles=(0.0, k, -k),
                             transform_scale=None, wave=wave, local_k=k),
            ClosedFormSymbol('jump_below', params, 'x>0', energy, (v0,), right, removable_poles=(0.0,),
                             transform_scale=None, wave=wave, local_k=kappa))


def step_amplitudes(k: float, ell: float):
    """R, T of the step from continuity of psi and psi' at x = 0."""
    return (k - ell) / (k + ell), 2.0 * k / (k + ell)


def step_scatter(k: float, ell: float, r: complex, t: complex, v0: float = 0.0, entry_id: str = 'jump_above'):
    """
    Entries for psi_- = exp(ikx) + R exp(-ikx), psi_+ = T exp(i ell x):

        x > 0: Im{e^{-2ix(p-l)} [-|T|^2/(p-l) + 2T conj(R)/(2p+k-l) + 2T/(2p-k-l)]}
        x < 0: Im{e^{-2ix(p-k)} [1/(p-k) - 2conj(T)/(2p-k-l) + conj(R)/p]
                  + e^{-2ix(p+k)} [|R|^2/(p+k) - 2conj(T)R/(2p+k-l) + R/p]}
    """
    r, t = complex(r), complex(t)
    rc, tc = r.conjugate(), t.conjugate()
    right = imag_terms([
        ExpTerm(lambda p: -abs(t) ** 2 / (p - ell) + 2.0 * t * rc / (2.0 * p + k - ell) + 2.0 * t / (2.0 * p - k - ell),
                lambda p: -2j * (p - ell), (-1, 1)),
    ])
    left = imag_terms([
        ExpTerm(lambda p: 1.0 / (p - k) - 2.0 * tc / (2.0 * p - k - ell) + rc / p, lambda p: -2j * (p - k), (-1, 1)),
        ExpTerm(lambda p: abs(r) ** 2 / (p + k) - 2.0 * tc * r / (2.0 * p + k - ell) + r / p,
                lambda p: -2j * (p + k), (-1, -1)),
    ])
    genuine = ((k + ell) / 2.0, (ell - k) / 2.0)
    wave = WaveFunction([Term.plane(k), Term.plane(-k, r)], [Term.plane(ell, t)],
                        label=f'{entry_id}(k={k}, V0={v0})')
    params = {'k': k, 'V0': v0, 'ell': ell, 'R': [r.real, r.imag], 'T': [t.real, t.imag]}
    energy = k * k
    return (ClosedFormSymbol(entry_id, params, 'x<0', energy, (0.0,), left, removable_poles=(0.0, k, -k),
                             genuine_poles=genuine, wave=wave, local_k=k),
            ClosedFormSymbol(entry_id, params, 'x>0', energy, (v0,), right, removable_poles=(ell,),
                             genuine_poles=genuine, wave=wave, local_k=ell))


def jump_above(k: float, v0: float):
    """Step V0 theta(x) above the barrier, ell = sqrt(k**2 - V0)."""
    _require_positive('k', k)
    if k * k <= v0:
        raise EnergyRangeException(f'jump_above needs k**2 > V0, got k={k}, V0={v0}; use jump_below.')
    if v0 < 0.0:
        raise EnergyRangeException(f'jump_above needs V0 >= 0, got {v0}.')
    ell = math.sqrt(k * k - v0)
    r, t = step_amplitudes(k, ell)
    return step_scatter(k, ell, r, t, v0)


def _match_g(q):
    """exp(-q**2/2) erf(i q / sqrt 2), through the Faddeeva function so it stays bounded."""
    return np.exp(-q * q / 2.0) - faddeeva(-q / SQRT2)


def match_free_sho():
    """
    E = 1 state of H = p**2 + theta(x) x**2: psi_- = cos x, psi_+ = exp(-x**2/2)
    :return: (entry on x < 0, entry on x > 0)
    """
    left = []
    for sign, key in ((-1.0, (1, -1)), (1.0, (1, 1))):
        def sin_coef(p, s=sign):
            q = 2.0 * p + s
            return -0.25 * (1.0 / (p + s) + 1.0 / p + 2j * SQRT2PI * _match_g(q))

        def cos_coef(p, s=sign):
            q = 2.0 * p + s
            return 0.25 * 2.0 * SQRT2PI * np.exp(-q * q / 2.0)

        left += oscillating_terms(sin_coef, cos_coef, lambda p, s=sign: 2.0 * (p + s), key)

    prefactor = math.sqrt(math.pi) / (2.0 * SQRT2)
    right = []
    for sigma in (1.0, -1.0):
        for tau in (1.0, -1.0):
            right.append(ErfcTerm(prefactor, 0.0,
                                  lambda p, s=sigma, t=tau: 2j * s * (p + t),
                                  lambda p, t=tau: -(2.0 * p + t) ** 2 / 2.0,
                                  SQRT2, lambda p, s=sigma, t=tau: s * 1j * (2.0 * p + t) / SQRT2))
    for sigma in (1.0, -1.0):
        right.append(ErfcTerm(-prefactor * SQRT2, -1.0, lambda p: 0.0 * p, lambda p: -p * p,
                              1.0, lambda p, s=sigma: s * 1j * p))
    right.append(ErfcTerm(prefactor * 2.0 * SQRT2, -1.0, lambda p: 0.0 * p, lambda p: -p * p))

    wave = WaveFunction(Term.cosine(1.0), [Term.gaussian()], label='match_free_sho')
    return (ClosedFormSymbol('match_free_sho', {}, 'x<0', 1.0, (0.0,), left, removable_poles=(0.0, 1.0, -1.0),
                             wave=wave, local_k=1.0),
            ClosedFormSymbol('match_free_sho', {}, 'x>0', 1.0, (0.0, 0.0, 1.0), right, wave=wave))
