"""
Row-by-row evaluation of the piecewise Wigner integral.

For a split at x0 and u = x - x0 the y-axis falls into three pieces:

    (-inf, -|u|)  psi_1 left,  psi_2 right
    (-|u|, |u|)   both left (u < 0) or both right (u > 0)
    (|u|, inf)    psi_1 right, psi_2 left

The middle piece and decaying tail pairs are summed with Gauss-Legendre panels.
Tail pairs that neither decay nor grow (plane wave times plane wave) are damped
by exp(-2 eps |y|), i.e. p -> p - i eps, integrated numerically over a head and
in closed form beyond it, and extrapolated to eps -> 0 from three eps values.
"""
import logging
import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from wigner_matching.exceptions import NonConvergentException, WignerMatchingException

FLAT_TOL = 1e-12

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return leggauss(n)


def panel_nodes(lo: float, hi: float, width: float, n: int):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    if hi <= lo:
        return np.zeros(0), np.zeros(0)
    panels = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, panels + 1)
    base_x, base_w = _gauss_legendre(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def _fourier(y, weighted, p):
    """sum_k weighted[..., k] exp(-2 i p y_k) for every p."""
    if y.size == 0:
        return np.zeros(weighted.shape[:-1] + p.shape, dtype=complex)
    return weighted @ np.exp(-2j * np.outer(y, p))


def _pair_values(t1, t2, x, y):
    return t1(x + y) * np.conj(t2(x - y))


def _classify(t1, t2, direction):
    """'decaying' or 'flat' for the pair t1(x + y) conj(t2(x - y)) as y -> direction * inf."""
    a = t1.a - np.conj(t2.a)
    b = t1.b + np.conj(t2.b)
    if b.real < 0.0 or (b == 0 and direction * a.real < -FLAT_TOL):
        return 'decaying'
    if b == 0 and abs(a.real) <= FLAT_TOL and t1.power == 0 and t2.power == 0:
        return 'flat'
    raise WignerMatchingException(f'Cross term {t1!r} x conj({t2!r}) diverges as y -> {direction:+d} inf.')


def richardson(eps, values):
    """Value at eps = 0 of the quadratic through three (eps_i, v_i) points."""
    total = 0.0
    for i in range(3):
        weight = 1.0
        for j in range(3):
            if j != i:
                weight *= eps[j] / (eps[j] - eps[i])
        total = total + weight * values[i]
    return total


def _linear_limit(eps, values):
    return (eps[1] * values[2] - eps[2] * values[1]) / (eps[1] - eps[2])


def _decaying_cutoff(pairs, x, start, direction, spec):
    step = spec.panel_width
    s = start + step * np.arange(int(spec.max_extent / step) + 1)
    envelope = np.zeros(s.shape)
    for t1, t2 in pairs:
        envelope += np.abs(_pair_values(t1, t2, x, direction * s))
    peak = envelope.max() if envelope.size else 0.0
    if peak == 0.0:
        return start
    alive = np.flatnonzero(envelope > spec.envelope_tol * peak)
    return s[min(alive[-1] + 1, len(s) - 1)]


def _tail(first_terms, second_terms, x, start, direction, p, spec):
    """
    Contribution of one tail; returns (decaying part, flat part for each eps, flat-pair poles)
    """
    decaying, flat = [], []
    for t1 in first_terms:
        for t2 in second_terms:
            kind = _classify(t1, t2, direction)
            (decaying if kind == 'decaying' else flat).append((t1, t2))

    dec_value = np.zeros(p.shape, dtype=complex)
    if decaying:
        end = _decaying_cutoff(decaying, x, start, direction, spec)
        s, w = panel_nodes(start, end, spec.panel_width, spec.n_nodes)
        g = sum(_pair_values(t1, t2, x, direction * s) for t1, t2 in decaying)
        dec_value = _fourier(direction * s, w * g, p)

    eps = np.asarray(spec.epsilons)
    flat_values = np.zeros((3,) + p.shape, dtype=complex)
    poles = []
    if flat:
        head_end = start + spec.head_length
        s, w = panel_nodes(start, head_end, spec.panel_width, spec.n_nodes)
        g = sum(_pair_values(t1, t2, x, direction * s) for t1, t2 in flat)
        damped = (w * g)[None, :] * np.exp(-2.0 * eps[:, None] * s[None, :])
        flat_values += _fourier(direction * s, damped, p)
        for t1, t2 in flat:
            a = t1.a - np.conj(t2.a)
            k = t1.coef * np.conj(t2.coef) * np.exp((t1.a + np.conj(t2.a)) * x)
            poles.append(a.imag / 2.0)
            for i, e in enumerate(eps):
                rate = a - 2j * p - 2.0 * direction * e
                flat_values[i] += -direction * k * np.exp(rate * direction * head_end) / rate
    return dec_value, flat_values, poles


def transform_rows(first, second, grid, spec):
    """
    pi * rho_12 on every grid cell; eps-extrapolation spreads are measured against the sup of the whole transform
    :return: (values of shape grid.shape, extrapolation report)
    """
    p = grid.p
    values = np.zeros(grid.shape, dtype=complex)
    far_spreads, near_spreads, all_poles = {}, {}, set()
    for row, x in enumerate(grid.x):
        u = x - first.split
        half = abs(u)
        middle_first, middle_second = (first.left, second.left) if u < 0 else (first.right, second.right)
        s, w = panel_nodes(-half, half, spec.panel_width, spec.n_nodes)
        g = np.zeros(s.shape, dtype=complex)
        for t1 in middle_first:
            for t2 in middle_second:
                g += _pair_values(t1, t2, x, s)
        total = _fourier(s, w * g, p)

        flat_total = np.zeros((3,) + p.shape, dtype=complex)
        row_poles = []
        for first_terms, second_terms, direction in ((first.right, second.left, 1), (first.left, second.right, -1)):
            dec_value, flat_values, poles = _tail(first_terms, second_terms, x, half, direction, p, spec)
            total += dec_value
            flat_total += flat_values
            row_poles += poles

        if row_poles:
            limit = richardson(spec.epsilons, flat_total)
            spread = np.abs(limit - _linear_limit(spec.epsilons, flat_total))
            total = total + limit
            near = np.zeros(p.shape, dtype=bool)
            for p0 in row_poles:
                near |= np.abs(p - p0) < spec.spread_band
                all_poles.add(round(p0, 12))
            far_spreads[x] = float(np.max(spread[~near], initial=0.0))
            near_spreads[x] = float(np.max(spread[near], initial=0.0))
        values[row] = total

    scale = max(float(np.max(np.abs(values), initial=0.0)), np.finfo(float).tiny)
    max_spread = max(far_spreads.values(), default=0.0) / scale
    max_spread_near = max(near_spreads.values(), default=0.0) / scale
    if max_spread > spec.spread_tol:
        worst = max(far_spreads, key=far_spreads.get)
        raise NonConvergentException(f'cross term at x={worst:.6g}', max_spread, spec.spread_tol)
    if max_spread_near > spec.spread_tol:
        logger.warning(f'Epsilon extrapolation spread {max_spread_near:.3e} near cross-term poles {sorted(all_poles)}')
    report = {
        'epsilons': list(spec.epsilons),
        'max_spread': max_spread,
        'max_spread_near_poles': max_spread_near,
        'poles': sorted(all_poles),
    }
    return values, report
