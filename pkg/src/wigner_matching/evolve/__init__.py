"""
Time dependence of density-matrix symbols: the Moyal equation of motion, the
stationary ansatz and complexified time z = t - i s.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from wigner_matching.exceptions import WignerMatchingException
from wigner_matching.phase import PhaseGrid, SampledSymbol, norms
from wigner_matching.phase.loader import dump_csv
from wigner_matching.star import BoppOperator, PolySymbol
from wigner_matching.transform import OffDiagonalPair, QuadratureSpec, Term, WaveFunction, cross_wigner, phase_factor
from wigner_matching.verifier import (ResidualReport, local_symbol, multiply, off_diagonal_sse_residual,
                                      operator_report, prepare)

TIME_SERIES_COLUMNS = ('t', 's', 'left', 'right', 'dynamical', 'sup')

logger = logging.getLogger(__name__)


class ComplexTime(object):
    """z = t - i s; s >= 0 keeps the phase factor bounded when E_1 + E_2 >= 0."""

    def __init__(self, t: float = 0.0, s: float = 0.0):
        if not (math.isfinite(t) and math.isfinite(s)):
            raise WignerMatchingException(f'Complex time must be finite, got t={t}, s={s}.')
        self.t = float(t)
        self.s = float(s)

    @classmethod
    def from_complex(cls, z: complex):
        z = complex(z)
        return cls(z.real, 0.0 - z.imag)

    @property
    def z(self) -> complex:
        return complex(self.t, -self.s)

    def to_json(self):
        return {'t': self.t, 's': self.s}

    def __repr__(self):
        return f'ComplexTime(t={self.t}, s={self.s})'


def moyal_operator(a: PolySymbol) -> BoppOperator:
    """f -> (a * f - f * a) / i"""
    return (BoppOperator.left(a) - BoppOperator.right(a)) * -1j


def moyal_rhs(h, r, grid: Optional[PhaseGrid] = None, backend=None) -> SampledSymbol:
    """
    dR/dt = (H * R - R * H) / i
    :param h: Hamiltonian or PolySymbol
    :param r: symbol on one piece of h
    """
    a = local_symbol(h, 0.0, r, grid)
    op = moyal_operator(a)
    f, backend, entry, _ = prepare(r, grid, backend, op)
    return op.apply(f, backend, label=f'dR/dt[{entry}]')


def euler_step(h, r: SampledSymbol, dt: float, backend=None) -> SampledSymbol:
    """One forward-Euler step R + dt dR/dt; first order in dt, for demonstration only."""
    rhs = moyal_rhs(h, r, backend=backend)
    return r.with_values(r.values + dt * rhs.values, mask=rhs.mask)


def stationary_ansatz_check(h, e1: float, e2: float, rho12, grid: Optional[PhaseGrid] = None, backend=None):
    """
    H * rho - rho * H = (E_1 - E_2) rho and H * rho + rho * H = (E_1 + E_2) rho
    :return: dict with the 'commutator' and 'anticommutator' ResidualReports
    """
    a = local_symbol(h, 0.0, rho12, grid)
    left, right = BoppOperator.left(a), BoppOperator.right(a)
    commutator = left - right - multiply(PolySymbol.constant(e1 - e2))
    anticommutator = left + right - multiply(PolySymbol.constant(e1 + e2))
    f, backend, entry, exclusions = prepare(rho12, grid, backend, left)
    bound = max(abs(e1), abs(e2))

    def weight(xx, pp):
        return np.abs(a(xx, pp)) + bound

    return {
        'commutator': operator_report(commutator, f, backend, entry, 'commutator', weight, exclusions),
        'anticommutator': operator_report(anticommutator, f, backend, entry, 'anticommutator', weight, exclusions),
    }


class EvolutionResult(object):
    def __init__(self, z: ComplexTime, symbol: SampledSymbol, left: ResidualReport, right: ResidualReport,
                 dynamical: ResidualReport, factor: complex):
        self.z = z
        self.symbol = symbol
        self.left = left
        self.right = right
        self.dynamical = dynamical
        self.factor = factor

    @property
    def reports(self):
        return [self.left, self.right, self.dynamical]

    def to_json(self):
        return {
            'z': self.z.to_json(),
            'factor': [self.factor.real, self.factor.imag],
            'sup': norms(self.symbol)['sup'],
            'reports': [r.to_json() for r in self.reports],
        }


def _eigen_report(a: PolySymbol, energy: float, f: SampledSymbol, backend, entry: str, side: str):
    op = BoppOperator.left(a) if side == 'left' else BoppOperator.right(a)
    op = op - multiply(PolySymbol.constant(energy))
    return operator_report(op, f, backend, entry, f'eigen_{side}', lambda xx, pp: np.abs(a(xx, pp)) + abs(energy))


def complexified_evolution(pair: OffDiagonalPair, h, z: ComplexTime, grid: PhaseGrid,
                           quadrature: Optional[QuadratureSpec] = None, backend=None,
                           rho12: Optional[SampledSymbol] = None) -> EvolutionResult:
    """
    R(z) = rho_12 exp(-i (E_1 z - E_2 conj(z))) with the checks H * R = E_1 R, R * H = E_2 R and
    (i d_z - H) * R * (-i d_zbar - H) = 0; the dynamical check substitutes i d_z R = E_1 R and
    -i d_zbar R = E_2 R, i.e. it is the off-diagonal sandwich (E_1 - H) * R * (E_2 - H) = 0 at z
    :param rho12: precomputed t = 0 transform, reused across several z
    """
    if rho12 is None:
        rho12 = cross_wigner(pair.first, pair.second, grid, quadrature,
                             label=f'W[{pair.first.label},{pair.second.label}]')
    factor = phase_factor(pair.e1, pair.e2, z.z)
    symbol = SampledSymbol(grid, rho12.values * factor, rho12.mask, label=f'{rho12.label}(z={z.z})',
                           meta=dict(rho12.meta, z=[z.z.real, z.z.imag]))
    a = local_symbol(h, 0.0, symbol, grid)
    f, backend, entry, _ = prepare(symbol, grid, backend)
    left = _eigen_report(a, pair.e1, f, backend, entry, 'left')
    right = _eigen_report(a, pair.e2, f, backend, entry, 'right')
    dynamical = off_diagonal_sse_residual(h, pair.e1, pair.e2, f, grid, backend)
    dynamical.equation = 'dynamical'
    logger.info(f'z={z.z}: left {left.normalized:.3e}, right {right.normalized:.3e}, '
                f'dynamical {dynamical.normalized:.3e}')
    return EvolutionResult(z, symbol, left, right, dynamical, factor)


def evolution_series(pair: OffDiagonalPair, h, times: Sequence[ComplexTime], grid: PhaseGrid,
                     quadrature: Optional[QuadratureSpec] = None, backend=None, path: Optional[str] = None):
    """
    complexified_evolution at several z from one t = 0 transform
    :param path: optional CSV target with columns t, s, left, right, dynamical, sup
    """
    rho12 = cross_wigner(pair.first, pair.second, grid, quadrature,
                         label=f'W[{pair.first.label},{pair.second.label}]')
    results = [complexified_evolution(pair, h, z, grid, quadrature, backend, rho12) for z in times]
    if path:
        rows = [[r.z.t, r.z.s, r.left.normalized, r.right.normalized, r.dynamical.normalized,
                 norms(r.symbol)['sup']] for r in results]
        dump_csv(path, TIME_SERIES_COLUMNS, rows)
    return results


def oscillator_pair(m1: int = 0, m2: int = 1) -> OffDiagonalPair:
    """Two lowest oscillator states x^m exp(-x^2/2), E = 2m + 1 for H = p^2 + x^2."""
    if max(m1, m2) > 1 or min(m1, m2) < 0:
        raise WignerMatchingException('Only the two lowest oscillator states are built in.')
    states = [WaveFunction.whole([Term.oscillator(m)], label=f'oscillator{m}') for m in (m1, m2)]
    return OffDiagonalPair(states[0], states[1], 2.0 * m1 + 1.0, 2.0 * m2 + 1.0)


__all__ = ['ComplexTime', 'EvolutionResult', 'complexified_evolution', 'euler_step', 'evolution_series',
           'moyal_operator', 'moyal_rhs', 'oscillator_pair', 'stationary_ansatz_check']
