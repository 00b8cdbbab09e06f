"""
Fundamental solutions of the free star-eigen-star equation, per-momentum
coefficient fits and interface checks between the pieces of a Wigner function.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from wigner_matching.catalog import ClosedFormSymbol, ExpTerm
from wigner_matching.catalog.symbols import POLE_BAND
from wigner_matching.exceptions import EnergyRangeException, WignerMatchingException
from wigner_matching.phase import PhaseGrid, SampledSymbol
from wigner_matching.phase.loader import dump_csv

COLLOCATION_PER_ELEMENT = 3
COND_LIMIT = 1e10
FIT_BAND = 0.05

# complex elements, in key order (1, 1), (1, -1), (-1, 1), (-1, -1)
COMPLEX_KEYS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# rows: cos2kx cos2px, cos2kx sin2px, sin2kx cos2px, sin2kx sin2px in terms of exp(2i(s_p p + s_c k)x)
TRIG_FROM_COMPLEX = np.array([
    [0.25, 0.25, 0.25, 0.25],
    [-0.25j, -0.25j, 0.25j, 0.25j],
    [-0.25j, 0.25j, -0.25j, 0.25j],
    [-0.25, 0.25, 0.25, -0.25],
], dtype=complex)

# rows: e^{2 s kappa x} cos2px, e^{2 s kappa x} sin2px for s = +1, -1, in terms of exp(2i s_p p x + 2 s_c kappa x)
EVANESCENT_TRIG_FROM_COMPLEX = np.array([
    [0.5, 0.0, 0.5, 0.0],
    [-0.5j, 0.0, 0.5j, 0.0],
    [0.0, 0.5, 0.0, 0.5],
    [0.0, -0.5j, 0.0, 0.5j],
], dtype=complex)

TRIG_NAMES = ('cos2kx_cos2px', 'cos2kx_sin2px', 'sin2kx_cos2px', 'sin2kx_sin2px')
EVANESCENT_TRIG_NAMES = ('exp+2kx_cos2px', 'exp+2kx_sin2px', 'exp-2kx_cos2px', 'exp-2kx_sin2px')

logger = logging.getLogger(__name__)


def _complex_term(scale: float, key: Tuple[int, int], evanescent: bool, coef: complex = 1.0) -> ExpTerm:
    s_p, s_c = key
    if evanescent:
        return ExpTerm(lambda p: coef + 0.0 * p, lambda p: 2j * s_p * p + 2.0 * s_c * scale, key, True)
    return ExpTerm(lambda p: coef + 0.0 * p, lambda p: 2j * (s_p * p + s_c * scale), key)


def fundamental_solution(energy: float, scale: float, key: Tuple[int, int]) -> ClosedFormSymbol:
    """Single exponential exp(2i(s_p p + s_c k)x), or exp(2i s_p p x + 2 s_c kappa x) for E < 0."""
    evanescent = energy < 0.0
    name = f'fundamental{key}'
    return ClosedFormSymbol(name, {'E': energy, 'key': list(key)}, 'all', energy, (0.0,),
                            [_complex_term(scale, key, evanescent)], real=False, local_k=scale)


class FundamentalBasis(object):
    """
    Four fundamental solutions of the free equation at energy E.
    `transform[i, j]` gives element i in terms of the complex exponential j (COMPLEX_KEYS order).
    """

    def __init__(self, energy: float, scale: float, form: str, elements: List[ClosedFormSymbol],
                 transform: np.ndarray, names: Sequence[str]):
        self.energy = energy
        self.scale = scale
        self.form = form
        self.elements = elements
        self.transform = transform
        self.names = tuple(names)

    @property
    def positive(self):
        return self.energy > 0.0

    @property
    def poles(self):
        """Momenta where two elements coincide."""
        return (0.0, self.scale, -self.scale) if self.positive else (0.0,)

    def values(self, x, p, n: int = 0):
        """n-th x-derivative of every element; shape (4,) + broadcast(x, p).shape"""
        return np.stack([element.d_x(n, x, p) for element in self.elements])

    def collocation_matrix(self, xs, p: float):
        return self.values(np.asarray(xs, dtype=float), np.full(len(xs), p, dtype=float)).T

    def to_json(self):
        return {'energy': self.energy, 'scale': self.scale, 'form': self.form, 'elements': list(self.names)}


def basis(energy: float, k_or_kappa: Optional[float] = None, form: str = 'trig') -> FundamentalBasis:
    """
    Fundamental basis of the free equation
    :param energy: E = k^2 > 0 or E = -kappa^2 < 0
    :param k_or_kappa: optional explicit k or kappa; must agree with E
    :param form: 'trig' (real elements) or 'complex' (single exponentials)
    """
    if energy == 0.0:
        raise EnergyRangeException('E = 0 has a degenerate (confluent) fundamental basis.')
    scale = math.sqrt(abs(energy))
    if k_or_kappa is not None and not math.isclose(k_or_kappa, scale, rel_tol=1e-12):
        raise EnergyRangeException(f'k or kappa {k_or_kappa} does not match E = {energy}.')
    if form == 'complex':
        complex_elements = [fundamental_solution(energy, scale, key) for key in COMPLEX_KEYS]
        names = [f'exp{key}' for key in COMPLEX_KEYS]
        return FundamentalBasis(energy, scale, form, complex_elements, np.eye(4, dtype=complex), names)
    if form != 'trig':
        raise WignerMatchingException(f'Unknown basis form {form!r}.')
    transform = TRIG_FROM_COMPLEX if energy > 0.0 else EVANESCENT_TRIG_FROM_COMPLEX
    names = TRIG_NAMES if energy > 0.0 else EVANESCENT_TRIG_NAMES
    evanescent = energy < 0.0
    elements = []
    for row, name in zip(transform, names):
        components = [_complex_term(scale, key, evanescent, coef) for key, coef in zip(COMPLEX_KEYS, row) if coef != 0]
        elements.append(ClosedFormSymbol(name, {'E': energy}, 'all', energy, (0.0,), components, real=True,
                                         local_k=scale))
    return FundamentalBasis(energy, scale, form, elements, transform, names)


class CoefficientFit(object):
    """
    Per-momentum least-squares coefficients c_j(p) of data = sum_j c_j(p) b_j(x, p).
    Excluded momenta carry NaN coefficients.
    """

    def __init__(self, basis: FundamentalBasis, p, coefficients, residual, cond, excluded, label: str = ''):
        self.basis = basis
        self.p = np.asarray(p, dtype=float)
        self.coefficients = np.asarray(coefficients, dtype=complex)
        self.residual = np.asarray(residual, dtype=float)
        self.cond = np.asarray(cond, dtype=float)
        self.excluded = np.asarray(excluded, dtype=bool)
        self.label = label

    @property
    def ill_conditioned(self):
        return self.cond > COND_LIMIT

    @property
    def usable(self):
        return ~(self.excluded | self.ill_conditioned)

    def in_complex_basis(self) -> Dict[Tuple[int, int], np.ndarray]:
        converted = self.coefficients @ self.basis.transform
        return {key: converted[:, j] for j, key in enumerate(COMPLEX_KEYS)}

    def evaluate(self, x, n: int = 0):
        """sum_j c_j(p) d^n b_j / dx^n at the fitted momenta, shape (len(x), len(p))"""
        xx, pp = np.meshgrid(np.asarray(x, dtype=float), self.p, indexing='ij')
        values = self.basis.values(xx, pp, n)
        return np.einsum('jab,bj->ab', values, self.coefficients)

    def reconstruct(self, grid: PhaseGrid) -> SampledSymbol:
        if not np.allclose(grid.p, self.p):
            raise WignerMatchingException('Reconstruction grid must use the fitted momenta.')
        values = np.nan_to_num(self.evaluate(grid.x))
        mask = np.broadcast_to(~self.usable[None, :], grid.shape)
        return SampledSymbol(grid, values, mask, label=f'fit[{self.label}]')

    def to_csv(self, path: str):
        """Columns p, re c1, im c1, ..., re c4, im c4, fit_residual, cond."""
        columns = ['p']
        for j in range(len(self.basis.elements)):
            columns += [f're_c{j + 1}', f'im_c{j + 1}']
        columns += ['fit_residual', 'cond']
        parts = [self.p[:, None]]
        for j in range(self.coefficients.shape[1]):
            parts += [self.coefficients[:, j].real[:, None], self.coefficients[:, j].imag[:, None]]
        parts += [self.residual[:, None], self.cond[:, None]]
        dump_csv(path, columns, np.hstack(parts))

    def to_json(self):
        usable = self.usable
        return {
            'label': self.label,
            'basis': self.basis.to_json(),
            'n_p': int(self.p.size),
            'n_excluded': int(np.count_nonzero(self.excluded)),
            'n_ill_conditioned': int(np.count_nonzero(self.ill_conditioned & ~self.excluded)),
            'max_fit_residual': float(np.max(self.residual[usable], initial=0.0)),
        }


def chebyshev_points(lo: float, hi: float, n: int):
    """Chebyshev points of the first kind on [lo, hi]."""
    theta = (2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(theta)


def _region(domain: str, x_range: Tuple[float, float]):
    lo, hi = x_range
    if domain == 'x<0':
        hi = min(hi, 0.0)
    elif domain == 'x>0':
        lo = max(lo, 0.0)
    if not hi > lo:
        raise WignerMatchingException(f'Empty fitting region for domain {domain} in [{x_range[0]}, {x_range[1]}].')
    return lo, hi


def fit_coefficients(data, fit_basis: FundamentalBasis, p=None, x_range: Tuple[float, float] = (-4.0, 0.0),
                     band: float = FIT_BAND, n_points: Optional[int] = None) -> CoefficientFit:
    """
    Fit data(x, p) = sum_j c_j(p) b_j(x, p) independently for every p
    :param data: ClosedFormSymbol (evaluated at Chebyshev points of its region) or SampledSymbol
                 (fitted on its unmasked grid rows, at least 8 per p)
    :param fit_basis: basis to fit against
    :param p: momenta, required for closed forms; the grid momenta for sampled data
    :param x_range: x window of the fit for closed forms
    :param band: momenta closer than this to a basis pole are excluded
    :param n_points: collocation points per p, default 3 per basis element
    """
    n_elements = len(fit_basis.elements)
    if isinstance(data, ClosedFormSymbol):
        if p is None:
            raise WignerMatchingException('Momenta are required to fit a closed form.')
        p = np.asarray(p, dtype=float)
        lo, hi = _region(data.domain, x_range)
        xs = chebyshev_points(lo, hi, n_points or COLLOCATION_PER_ELEMENT * n_elements)
        xx, pp = np.meshgrid(xs, p, indexing='ij')
        table = data.d_x(0, xx, pp)
        rows = np.ones(table.shape, dtype=bool)
        label = data.name
        pole_cells = np.zeros(p.shape, dtype=bool)
        for p0 in data.poles:
            pole_cells |= np.abs(p - p0) < POLE_BAND
    elif isinstance(data, SampledSymbol):
        p = data.grid.p
        xs = data.grid.x
        table = np.asarray(data.values)
        rows = ~data.mask
        label = data.label
        pole_cells = rows.sum(axis=0) < max(8, n_elements)
    else:
        raise WignerMatchingException(f'Cannot fit data of type {type(data).__name__}.')

    excluded = pole_cells.copy()
    for p0 in fit_basis.poles:
        excluded |= np.abs(p - p0) < band
    coefficients = np.full((p.size, n_elements), np.nan, dtype=complex)
    residual = np.full(p.size, np.nan)
    cond = np.full(p.size, np.nan)
    for j, pj in enumerate(p):
        if excluded[j]:
            continue
        use = rows[:, j]
        matrix = fit_basis.collocation_matrix(xs[use], pj)
        rhs = table[use, j]
        solution, _, rank, singular = linalg.lstsq(matrix, rhs)
        coefficients[j] = solution
        cond[j] = singular[0] / singular[-1] if singular[-1] > 0 else np.inf
        scale = max(float(np.linalg.norm(rhs)), np.finfo(float).tiny)
        residual[j] = float(np.linalg.norm(matrix @ solution - rhs)) / scale
    flagged = np.count_nonzero(cond[~excluded] > COND_LIMIT)
    if flagged:
        logger.warning(f'Fit of {label}: {flagged} momenta with collocation condition number above {COND_LIMIT:.0e}')
    return CoefficientFit(fit_basis, p, coefficients, residual, cond, excluded, label)


def coefficient_error(fit: CoefficientFit, symbol: ClosedFormSymbol) -> float:
    """
    Largest relative deviation of the fitted complex-basis coefficients from the
    analytic ones read off the closed form, over the usable momenta
    """
    exact = symbol.exp_coefficients(fit.p)
    fitted = fit.in_complex_basis()
    usable = fit.usable.copy()
    reference = np.zeros(fit.p.shape)
    deviation = np.zeros(fit.p.shape)
    for key in COMPLEX_KEYS:
        target = np.asarray(exact.get(key, np.zeros(fit.p.shape)), dtype=complex)
        reference = np.maximum(reference, np.abs(target))
        deviation = np.maximum(deviation, np.abs(fitted[key] - target))
    usable &= np.isfinite(deviation) & (reference > 0.0)
    if not usable.any():
        raise WignerMatchingException(f'No usable momenta to compare {symbol.name} against.')
    return float(np.max(deviation[usable] / reference[usable]))


def _side_values(side, x0: float, p):
    if side is None:
        return np.zeros(p.shape, dtype=complex), np.zeros(p.shape, dtype=complex)
    if isinstance(side, ClosedFormSymbol):
        x = np.full(p.shape, x0)
        return side.d_x(0, x, p), side.d_x(1, x, p)
    if isinstance(side, CoefficientFit):
        if not np.array_equal(side.p, p):
            raise WignerMatchingException('Fits must be evaluated on their own momenta.')
        return side.evaluate([x0])[0], side.evaluate([x0], 1)[0]
    raise WignerMatchingException(f'Cannot match a side of type {type(side).__name__}.')


MATCH_CONDITIONS = ('wall', 'c0', 'c1')


def assemble_and_match(left, right, p, x0: float = 0.0, conditions: Sequence[str] = MATCH_CONDITIONS):
    """
    Interface conditions between two pieces at x0, as per-p mismatches
    :param left: ClosedFormSymbol, CoefficientFit or None (identically zero)
    :param right: same
    :param p: momenta to check
    :param conditions: any of 'wall' (rho(x0, p) = 0 on every present side), 'c0' (value continuity)
                       and 'c1' (first x-derivative continuity)
    :return: report dict; mismatches are data, never raised
    """
    p = np.asarray(p, dtype=float)
    unknown = set(conditions) - set(MATCH_CONDITIONS)
    if unknown:
        raise WignerMatchingException(f'Unknown interface conditions {sorted(unknown)}.')
    keep = np.ones(p.shape, dtype=bool)
    for side in (left, right):
        if isinstance(side, ClosedFormSymbol):
            for p0 in side.genuine_poles:
                keep &= np.abs(p - p0) >= POLE_BAND
        elif isinstance(side, CoefficientFit):
            keep &= side.usable
    value_l, slope_l = _side_values(left, x0, p)
    value_r, slope_r = _side_values(right, x0, p)
    value_l, slope_l, value_r, slope_r = (v[keep] for v in (value_l, slope_l, value_r, slope_r))

    def summary(mismatch, scale):
        worst = float(np.max(mismatch, initial=0.0))
        return {'max': worst, 'relative': worst / scale if scale > 0.0 else worst}

    report = {'x0': x0, 'n_p': int(np.count_nonzero(keep)), 'conditions': {}}
    value_scale = float(max(np.max(np.abs(value_l), initial=0.0), np.max(np.abs(value_r), initial=0.0)))
    slope_scale = float(max(np.max(np.abs(slope_l), initial=0.0), np.max(np.abs(slope_r), initial=0.0)))
    if 'wall' in conditions:
        present = [v for side, v in ((left, value_l), (right, value_r)) if side is not None]
        mismatch = np.max(np.abs(np.stack(present)), axis=0) if present else np.zeros(value_l.shape)
        report['conditions']['wall'] = summary(mismatch, 1.0)
    if 'c0' in conditions:
        report['conditions']['c0'] = summary(np.abs(value_l - value_r), value_scale)
    if 'c1' in conditions:
        report['conditions']['c1'] = summary(np.abs(slope_l - slope_r), slope_scale)
    logger.info(f'Interface at x0={x0}: {report["conditions"]}')
    return report
