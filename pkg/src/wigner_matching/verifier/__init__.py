"""
Residuals of the phase-space stationarity equations.

Every evaluator builds the equation as one BoppOperator acting on rho, so that
algebraically equal forms (the star form, the quartic free form, the explicit
harmonic form, the long form with a potential) are compared as operators and
agree to round-off when they share a derivative backend.
"""
import logging
import math
from typing import Callable, Optional, Union

import numpy as np

from wigner_matching.catalog import POLE_BAND, ClosedFormSymbol
from wigner_matching.exceptions import PieceMismatchException, WignerMatchingException
from wigner_matching.phase import Hamiltonian, PhaseGrid, SampledSymbol, norms
from wigner_matching.phase.derivative import AnalyticBackend, FiniteDifferenceBackend
from wigner_matching.star import BoppOperator, PolySymbol, hamiltonian_piece

ROUNDOFF_FLOOR = 1e-12

logger = logging.getLogger(__name__)


class ResidualReport(object):
    """
    Residual field of one equation with its interior norms.
    The headline number is `normalized` = sup / reference.
    """

    def __init__(self, entry: str, equation: str, residual: SampledSymbol, reference: float,
                 exclusions: Optional[dict] = None, convergence: Optional[list] = None, extra: Optional[dict] = None):
        self.entry = entry
        self.equation = equation
        self.residual = residual
        self.reference = float(reference)
        self.exclusions = exclusions or {}
        self.convergence = convergence or []
        self.extra = extra or {}
        stats = norms(residual)
        self.sup = stats['sup']
        self.l2 = stats['l2']
        self.location_of_max = stats['location_of_max']

    @property
    def normalized(self):
        if self.reference <= 0.0:
            return self.sup
        return self.sup / self.reference

    @property
    def name(self):
        return f'{self.entry}:{self.equation}'

    def to_json(self):
        data = {
            'entry': self.entry,
            'equation': self.equation,
            'normalized_sup': self.normalized,
            'sup': self.sup,
            'l2': self.l2,
            'reference': self.reference,
            'location_of_max': list(self.location_of_max) if self.location_of_max else None,
            'exclusions': self.exclusions,
            'convergence': self.convergence,
        }
        data.update(self.extra)
        return data

    def __repr__(self):
        return f'ResidualReport({self.name}, normalized={self.normalized:.3e})'


def _poly_backend(poly: PolySymbol) -> AnalyticBackend:
    return AnalyticBackend(lambda a, b, xx, pp: poly.derivative(a, b)(xx, pp), repr(poly))


def _needs_p_derivatives(op: BoppOperator):
    return any(b for _, b in op.terms)


def prepare(rho, grid: Optional[PhaseGrid], backend=None, op: Optional[BoppOperator] = None):
    """
    Normalise the supported kinds of rho to (sampled symbol, backend, entry name, exclusions)

    Closed forms are differentiated analytically in x; if the operator needs
    p-derivatives a 4th-order finite difference backend is used instead.
    """
    if isinstance(rho, ClosedFormSymbol):
        if grid is None:
            raise WignerMatchingException(f'A grid is required to sample {rho.name}.')
        f = rho.sample(grid)
        exclusions = {'domain': rho.domain, 'poles': list(rho.poles), 'pole_band': POLE_BAND,
                      'masked_fraction': float(np.count_nonzero(f.mask)) / f.mask.size}
        if backend is None:
            needs_p = op is not None and _needs_p_derivatives(op)
            backend = FiniteDifferenceBackend(4) if needs_p else rho.analytic_backend()
        return f, backend, rho.name, exclusions
    if isinstance(rho, PolySymbol):
        if grid is None:
            raise WignerMatchingException('A grid is required to sample a polynomial symbol.')
        return rho.sample(grid), backend or _poly_backend(rho), repr(rho), {}
    if isinstance(rho, SampledSymbol):
        return rho, backend or FiniteDifferenceBackend(4), rho.label or 'sampled', {}
    raise WignerMatchingException(f'Unsupported symbol type {type(rho).__name__}.')


def _padded_potential(coeffs):
    coeffs = list(coeffs) + [0.0] * (3 - len(coeffs))
    return tuple(float(c) for c in coeffs)


def local_symbol(h: Union[Hamiltonian, PolySymbol], energy: float, rho, grid: Optional[PhaseGrid]) -> PolySymbol:
    """
    Polynomial H - E on the piece rho lives on
    :raises PieceMismatchException: if rho's region and the Hamiltonian piece disagree
    """
    if isinstance(h, PolySymbol):
        return h - energy
    domain = rho.domain if isinstance(rho, ClosedFormSymbol) else 'all'
    if grid is None:
        grid = rho.grid
    lo, hi = grid.x_min, grid.x_max
    if domain == 'x<0':
        hi = min(hi, 0.0)
        lo = min(lo, hi)
    elif domain == 'x>0':
        lo = max(lo, 0.0)
        hi = max(lo, hi)
    idx = h.piece_index(lo, hi)
    if idx < 0:
        raise PieceMismatchException(f'{domain} [{lo}, {hi}]', repr(h))
    if isinstance(rho, ClosedFormSymbol) and _padded_potential(rho.potential) != _padded_potential(h.potential(idx)):
        raise PieceMismatchException(f'{rho.name} with potential {rho.potential}', f'{h!r} piece {idx}')
    return hamiltonian_piece(h, idx, energy)


def _energy(energy, rho):
    if energy is None:
        if not isinstance(rho, ClosedFormSymbol):
            raise WignerMatchingException('An energy is required for symbols without a catalog energy.')
        return rho.energy
    return float(energy)


def _reference(f: SampledSymbol, mask, weight) -> float:
    """sup over the unmasked cells of |weight(x, p) rho|."""
    xx, pp = f.grid.mesh()
    field = np.abs(np.broadcast_to(weight(xx, pp), f.grid.shape) * f.values)
    use = ~mask
    return float(field[use].max()) if use.any() else 0.0


def operator_report(op: BoppOperator, f: SampledSymbol, backend, entry: str, equation: str, weight: Callable,
                    exclusions: Optional[dict] = None, extra: Optional[dict] = None) -> ResidualReport:
    residual = op.apply(f, backend, label=f'{equation}[{entry}]')
    reference = _reference(f, residual.mask, weight)
    report = ResidualReport(entry, equation, residual, reference, exclusions, extra=extra)
    logger.debug(f'{report!r}')
    return report


def _as_operator(terms):
    return BoppOperator({key: value if isinstance(value, PolySymbol) else PolySymbol.constant(value)
                         for key, value in terms.items()})


def multiply(poly) -> BoppOperator:
    return _as_operator({(0, 0): poly})


def d_x(n: int = 1) -> BoppOperator:
    return _as_operator({(n, 0): 1.0})


def real_part(op: BoppOperator) -> BoppOperator:
    """Operator of Re(op f) for real f."""
    return BoppOperator({key: PolySymbol(value.coefficients.real) for key, value in op.terms.items()})


def imag_part(op: BoppOperator) -> BoppOperator:
    """Operator of Im(op f) for real f."""
    return BoppOperator({key: PolySymbol(value.coefficients.imag) for key, value in op.terms.items()})


def star_eigen_star_operator(a: PolySymbol, b: Optional[PolySymbol] = None) -> BoppOperator:
    """f -> (a * f) * b, with b = a by default."""
    b = a if b is None else b
    return BoppOperator.right(b).after(BoppOperator.left(a))


def eigen_residual(h, energy, rho, grid: Optional[PhaseGrid] = None, backend=None):
    """
    H * rho - E rho and rho * H - E rho
    :return: (left report, right report); for real rho the left report also carries the
             bracket split, Im = [H, rho] and Re = (H, rho) - E rho
    """
    energy = _energy(energy, rho)
    a = local_symbol(h, energy, rho, grid)
    left_op, right_op = BoppOperator.left(a), BoppOperator.right(a)
    f, backend, entry, exclusions = prepare(rho, grid, backend, left_op + right_op)
    weight = a
    left = operator_report(left_op, f, backend, entry, 'eigen_left', weight, exclusions)
    right = operator_report(right_op, f, backend, entry, 'eigen_right', weight, exclusions)
    if f.real or (isinstance(rho, ClosedFormSymbol) and rho.real):
        values = left.residual.values
        interior = left.residual.interior
        scale = left.reference if left.reference > 0.0 else 1.0
        left.extra['moyal_bracket'] = float(np.max(np.abs(values.imag[interior]), initial=0.0)) / scale
        left.extra['sym_bracket'] = float(np.max(np.abs(values.real[interior]), initial=0.0)) / scale
    return left, right


def sse_residual(h, energy, rho, grid: Optional[PhaseGrid] = None, backend=None) -> ResidualReport:
    """(H - E) * rho * (H - E): left Bopp operator first, then the right one."""
    energy = _energy(energy, rho)
    a = local_symbol(h, energy, rho, grid)
    op = star_eigen_star_operator(a)
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    return operator_report(op, f, backend, entry, 'sse', a * a, exclusions)


def quartic_operator(energy: float) -> BoppOperator:
    """(p^2 - E)^2 + 2 (p^2 + E) d_(2x)^2 + d_(2x)^4 with d_(2x) = d_x / 2."""
    p2 = PolySymbol.kinetic()
    return _as_operator({(0, 0): (p2 - energy) * (p2 - energy), (2, 0): (p2 + energy) * 0.5, (4, 0): 1.0 / 16.0})


def quartic_free_residual(rho, k: Optional[float] = None, kappa: Optional[float] = None,
                          grid: Optional[PhaseGrid] = None, backend=None) -> ResidualReport:
    """
    Free-region fourth-order operator; pass k for E = k^2 or kappa for E = -kappa^2
    """
    if (k is None) == (kappa is None):
        raise WignerMatchingException('Exactly one of k and kappa must be given.')
    energy = k * k if k is not None else -kappa * kappa
    op = quartic_operator(energy)
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    a = PolySymbol.kinetic() - energy
    equation = 'quartic' if k is not None else 'quartic_kappa'
    return operator_report(op, f, backend, entry, equation, a * a, exclusions)


def harmonic_operator(energy: float) -> BoppOperator:
    """
    [(s^2 - 1) - 2x dx - 2p dp - s (dx^2 + dp^2)/2 + x^2 dp^2 - 2xp dx dp + p^2 dx^2 + (dx^2 + dp^2)^2/16]
    with s = x^2 + p^2 - E
    """
    x, p = PolySymbol.x(), PolySymbol.p()
    s = x * x + p * p - energy
    return _as_operator({
        (0, 0): s * s - 1.0,
        (1, 0): x * -2.0,
        (0, 1): p * -2.0,
        (2, 0): p * p - s * 0.5,
        (0, 2): x * x - s * 0.5,
        (1, 1): x * p * -2.0,
        (4, 0): 1.0 / 16.0,
        (0, 4): 1.0 / 16.0,
        (2, 2): 2.0 / 16.0,
    })


def harmonic_sse_residual(energy, rho, grid: Optional[PhaseGrid] = None, backend=None) -> ResidualReport:
    """Explicit fourth-order form of the star-eigen-star equation for H = p^2 + x^2."""
    energy = _energy(energy, rho)
    op = harmonic_operator(energy)
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    s = PolySymbol.kinetic((0.0, 0.0, 1.0)) - energy
    return operator_report(op, f, backend, entry, 'harmonic_sse', s * s, exclusions)


def imaginary_part_checks(h, rho, grid: Optional[PhaseGrid] = None, backend=None) -> ResidualReport:
    """
    -Im(H * rho) for real rho: p dx rho for H = p^2, (p dx - x dp) rho for H = p^2 + x^2.
    Zero whenever the star-eigen equations hold.
    """
    a = local_symbol(h, 0.0, rho, grid)
    op = imag_part(BoppOperator.left(a)) * -1.0
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    if not (f.real or f.check_real(1e-10)):
        raise WignerMatchingException(f'{entry}: the imaginary-part diagnostic needs a real symbol.')
    return operator_report(op, f, backend, entry, 'imaginary_part', a, exclusions)


def long_form_terms(potential: PolySymbol, energy: float):
    """
    The eight groups of the expanded equation for H = p^2 + V(x), each as an operator on real rho
    """
    if potential.degree > 3:
        raise WignerMatchingException(f'Potentials of degree {potential.degree} > 3 are not supported.')
    kinetic = PolySymbol.kinetic() - energy
    v = BoppOperator.left(potential)
    re_v, im_v = real_part(v), imag_part(v)
    p_dx = multiply(PolySymbol.p()).after(d_x())
    shifted = multiply(kinetic) - d_x(2) * 0.25
    return {
        'quartic': quartic_operator(energy),
        'kinetic_re_v': multiply(kinetic).after(re_v),
        'p_dx_im_v': p_dx.after(im_v) * -1.0,
        'dx2_re_v': d_x(2).after(re_v) * -0.25,
        'im_v_p_dx': imag_part(v.after(p_dx)) * -1.0,
        'im_v_im_v': imag_part(v.after(im_v)),
        're_v_re_v': real_part(v.after(re_v)),
        're_v_shifted': real_part(v.after(shifted)),
    }


def long_form_operator(potential: PolySymbol, energy: float) -> BoppOperator:
    total = BoppOperator({})
    for op in long_form_terms(potential, energy).values():
        total = total + op
    return total


def long_form_residual(potential: PolySymbol, energy: float, rho, grid: Optional[PhaseGrid] = None,
                       backend=None) -> ResidualReport:
    """
    Expanded equation with a polynomial potential, term by term; equals sse_residual(p^2 + V) for real rho
    """
    terms = long_form_terms(potential, energy)
    total = long_form_operator(potential, energy)
    f, backend, entry, exclusions = prepare(rho, grid, backend, total)
    if not (f.real or f.check_real(1e-10)):
        raise WignerMatchingException(f'{entry}: the long form holds for real symbols only.')
    a = PolySymbol.kinetic() + potential - energy
    term_sups = {}
    for name, op in terms.items():
        term_sups[name] = norms(op.apply(f, backend))['sup']
    return operator_report(total, f, backend, entry, 'long_form', a * a, exclusions, extra={'terms': term_sups})


def conjugate_form_residual(h, energy, rho, grid: Optional[PhaseGrid] = None, backend=None,
                            side: str = 'left') -> ResidualReport:
    """
    (H - E) *bar ((H - E) * rho), or with side='right' ((rho * (H - E)) *bar (H - E)),
    where *bar is the product with the sign of i flipped.
    """
    energy = _energy(energy, rho)
    a = local_symbol(h, energy, rho, grid)
    if side == 'left':
        op = BoppOperator.left(a, conjugate=True).after(BoppOperator.left(a))
    elif side == 'right':
        op = BoppOperator.right(a, conjugate=True).after(BoppOperator.right(a))
    else:
        raise WignerMatchingException(f'Unknown side {side!r}.')
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    return operator_report(op, f, backend, entry, f'conjugate_{side}', a * a, exclusions)


def off_diagonal_sse_residual(h, e1: float, e2: float, rho12, grid: Optional[PhaseGrid] = None,
                              backend=None) -> ResidualReport:
    """(E_1 - H) * rho_12 * (E_2 - H)"""
    a1 = local_symbol(h, e1, rho12, grid) * -1.0
    a2 = local_symbol(h, e2, rho12, grid) * -1.0
    op = star_eigen_star_operator(a1, a2)
    f, backend, entry, exclusions = prepare(rho12, grid, backend, op)
    return operator_report(op, f, backend, entry, 'off_diagonal_sse', a1 * a2, exclusions)


def one_sided_residual(a: PolySymbol, rho, grid: Optional[PhaseGrid] = None, backend=None) -> ResidualReport:
    """a * rho * a, e.g. with a = p - k"""
    op = star_eigen_star_operator(a)
    f, backend, entry, exclusions = prepare(rho, grid, backend, op)
    return operator_report(op, f, backend, entry, f'one_sided[{a!r}]', a * a, exclusions)


def reflection_conflict(k: float, rho, grid: Optional[PhaseGrid] = None, backend=None):
    """
    Free-region diagnostics of a real symbol: the two star-eigen residuals, the
    star-eigen-star residual and both one-sided second-order residuals
    """
    h = PolySymbol.kinetic()
    left, right = eigen_residual(h, k * k, rho, grid, backend)
    sse = sse_residual(h, k * k, rho, grid, backend)
    p = PolySymbol.p()
    minus = one_sided_residual(p - k, rho, grid, backend)
    plus = one_sided_residual(p + k, rho, grid, backend)
    return {
        'entry': sse.entry,
        'k': k,
        'eigen': max(left.normalized, right.normalized),
        'sse': sse.normalized,
        'one_sided_minus': minus.normalized,
        'one_sided_plus': plus.normalized,
    }


def measured_orders(convergence):
    """Observed orders log2(e_h / e_{h/2}) between consecutive levels."""
    orders = []
    for coarse, fine in zip(convergence, convergence[1:]):
        if fine['norm'] <= ROUNDOFF_FLOOR or coarse['norm'] <= ROUNDOFF_FLOOR:
            orders.append(math.inf)
        else:
            orders.append(math.log(coarse['norm'] / fine['norm']) / math.log(coarse['h'] / fine['h']))
    return orders


def convergence_study(evaluate: Callable, grid: PhaseGrid, levels: int = 3) -> ResidualReport:
    """
    Run `evaluate(grid)` on h, h/2, h/4, ... and attach the sequence to the finest report
    :param evaluate: grid -> ResidualReport
    :param grid: coarsest grid
    :param levels: number of grids
    :return: finest report with `convergence` and the measured orders in `extra`
    """
    convergence = []
    report = None
    for level in range(levels):
        current = grid.refined(2 ** level) if level else grid
        report = evaluate(current)
        convergence.append({'h': current.dx, 'norm': report.normalized})
    report.convergence = convergence
    orders = measured_orders(convergence)
    report.extra['orders'] = orders
    report.extra['monotone'] = all(fine['norm'] <= max(coarse['norm'], ROUNDOFF_FLOOR)
                                   for coarse, fine in zip(convergence, convergence[1:]))
    logger.info(f'{report.name}: convergence {[c["norm"] for c in convergence]}, orders {orders}')
    return report
