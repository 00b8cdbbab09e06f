"""
Phase-space grids, sampled symbols and piecewise Hamiltonians.

Units are fixed to hbar = 1 and 2m = 1 everywhere in the package.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from wigner_matching.exceptions import GridException

MIN_POINTS = 8

logger = logging.getLogger(__name__)


class PhaseGrid(object):
    """Uniform rectangular sampling window of the (x, p) plane."""

    def __init__(self, x_min: float, x_max: float, p_min: float, p_max: float, nx: int, n_p: int):
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        self.p_min = float(p_min)
        self.p_max = float(p_max)
        self.nx = int(nx)
        self.n_p = int(n_p)
        self.dx = (self.x_max - self.x_min) / (self.nx - 1)
        self.dp = (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def shape(self):
        return self.nx, self.n_p

    @property
    def x(self):
        return self.x_min + np.arange(self.nx) * self.dx

    @property
    def p(self):
        return self.p_min + np.arange(self.n_p) * self.dp

    def mesh(self):
        return np.meshgrid(self.x, self.p, indexing='ij')

    def refined(self, factor: int = 2):
        """Grid covering the same window with the spacing divided by `factor`."""
        return PhaseGrid(self.x_min, self.x_max, self.p_min, self.p_max,
                         (self.nx - 1) * factor + 1, (self.n_p - 1) * factor + 1)

    def to_json(self):
        return {'x_min': self.x_min, 'x_max': self.x_max, 'p_min': self.p_min, 'p_max': self.p_max,
                'nx': self.nx, 'np': self.n_p}

    @classmethod
    def from_json(cls, data):
        return make_grid(data['x_min'], data['x_max'], data['p_min'], data['p_max'], data['nx'], data['np'])

    def __eq__(self, other):
        return isinstance(other, PhaseGrid) and self.to_json() == other.to_json()

    def __repr__(self):
        return (f'PhaseGrid(x=[{self.x_min}, {self.x_max}]x{self.nx}, '
                f'p=[{self.p_min}, {self.p_max}]x{self.n_p})')


def make_grid(x_min, x_max, p_min, p_max, nx, n_p) -> PhaseGrid:
    """
    Build a validated PhaseGrid
    :param x_min: left end of the x window
    :param x_max: right end of the x window
    :param p_min: lower end of the momentum window
    :param p_max: upper end of the momentum window
    :param nx: number of x samples, at least 8
    :param n_p: number of p samples, at least 8
    :return: the grid
    """
    for name, value in (('x_min', x_min), ('x_max', x_max), ('p_min', p_min), ('p_max', p_max)):
        if not np.isfinite(value):
            raise GridException(f'non-finite bound {name}={value}')
    if x_max == x_min:
        raise GridException('degenerate x-extent')
    if p_max == p_min:
        raise GridException('degenerate p-extent')
    if x_max < x_min:
        raise GridException(f'reversed x bounds ({x_min} > {x_max})')
    if p_max < p_min:
        raise GridException(f'reversed p bounds ({p_min} > {p_max})')
    if int(nx) < MIN_POINTS or int(n_p) < MIN_POINTS:
        raise GridException(f'undersized grid ({nx}x{n_p}); at least {MIN_POINTS} points per axis are required')
    return PhaseGrid(x_min, x_max, p_min, p_max, nx, n_p)


class SampledSymbol(object):
    """
    Complex phase-space function sampled on a PhaseGrid.

    `mask` marks cells excluded from norms: one-sided stencil margins, tapered
    spectral margins and exclusion bands around singular momenta.
    """

    def __init__(self, grid: PhaseGrid, values, mask=None, real: bool = False, label: str = '',
                 meta: Optional[dict] = None):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise GridException(f'values of shape {values.shape} do not match grid shape {grid.shape}')
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self.mask = np.zeros(grid.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        self.real = real
        self.label = label
        self.meta = meta if meta is not None else {}

    @classmethod
    def from_function(cls, grid: PhaseGrid, func, real: bool = False, label: str = ''):
        xx, pp = grid.mesh()
        return cls(grid, np.broadcast_to(func(xx, pp), grid.shape), real=real, label=label)

    def with_values(self, values, mask=None, real: bool = False, label: Optional[str] = None):
        merged = self.mask if mask is None else (self.mask | mask)
        return SampledSymbol(self.grid, values, merged, real, self.label if label is None else label)

    def with_mask(self, mask):
        return SampledSymbol(self.grid, self.values, self.mask | mask, self.real, self.label)

    @property
    def interior(self):
        return ~self.mask

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def check_real(self, rtol: float = 1e-12):
        scale = np.max(np.abs(self.values.real)) if self.values.size else 0.0
        return bool(np.max(np.abs(self.values.imag)) <= rtol * max(scale, np.finfo(float).tiny))

    def conj(self):
        return self.with_values(np.conj(self.values), real=self.real)

    def real_part(self):
        return self.with_values(self.values.real, real=True)

    def imag_part(self):
        return self.with_values(self.values.imag, real=True)

    def _combine(self, other, op):
        if isinstance(other, SampledSymbol):
            if other.grid != self.grid:
                raise GridException('symbols live on different grids')
            return self.with_values(op(self.values, other.values), mask=other.mask)
        return self.with_values(op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values, real=self.real)

    def __repr__(self):
        return f'SampledSymbol({self.label or "unnamed"}, {self.grid!r})'


class Hamiltonian(object):
    """
    Kinetic term p**2 plus a piecewise potential of degree at most 2.

    `pieces` is an ordered list of (x_lo, x_hi, (c0, c1, c2)) partitioning the line,
    the potential on a piece being c0 + c1 x + c2 x**2.
    """

    def __init__(self, pieces: Sequence[Tuple[float, float, Sequence[float]]], name: str = ''):
        pieces = [(float(lo), float(hi), tuple(float(c) for c in coeffs)) for lo, hi, coeffs in pieces]
        if not pieces or pieces[0][0] != -np.inf or pieces[-1][1] != np.inf:
            raise GridException('Hamiltonian pieces must cover the whole real line')
        for (lo, hi, coeffs), nxt in zip(pieces, pieces[1:] + [None]):
            if not lo < hi:
                raise GridException(f'empty or reversed piece [{lo}, {hi}]')
            if nxt is not None and nxt[0] != hi:
                raise GridException(f'pieces overlap or leave a gap at x={hi}')
            if len(coeffs) > 3:
                raise GridException('potential pieces are limited to degree 2')
        self.pieces: List[Tuple[float, float, Tuple[float, ...]]] = pieces
        self.name = name

    @classmethod
    def free(cls):
        return cls([(-np.inf, np.inf, (0.0,))], 'free')

    @classmethod
    def harmonic(cls):
        return cls([(-np.inf, np.inf, (0.0, 0.0, 1.0))], 'harmonic')

    @classmethod
    def step(cls, v0: float):
        return cls([(-np.inf, 0.0, (0.0,)), (0.0, np.inf, (v0,))], f'step(V0={v0})')

    @classmethod
    def free_harmonic(cls):
        return cls([(-np.inf, 0.0, (0.0,)), (0.0, np.inf, (0.0, 0.0, 1.0))], 'free|harmonic')

    def piece_index(self, x_lo: float, x_hi: float) -> int:
        """Index of the piece containing [x_lo, x_hi]; -1 if the interval straddles a break."""
        for idx, (lo, hi, _) in enumerate(self.pieces):
            if lo <= x_lo and x_hi <= hi:
                return idx
        return -1

    def potential(self, idx: int):
        return self.pieces[idx][2]

    def __repr__(self):
        return f'Hamiltonian({self.name or self.pieces})'


def norms(f: SampledSymbol):
    """
    Interior sup-norm, grid-weighted l2 norm and location of the maximum
    :param f: sampled symbol
    :return: dict with `sup`, `l2` and `location_of_max` as an (x, p) pair
    """
    interior = f.interior
    if not interior.any():
        logger.warning(f'norms of {f!r}: every cell is masked')
        return {'sup': 0.0, 'l2': 0.0, 'location_of_max': None}
    magnitude = np.where(interior, np.abs(f.values), -1.0)
    flat = int(np.argmax(magnitude))
    i, j = np.unravel_index(flat, f.grid.shape)
    sup = float(magnitude[i, j])
    l2 = float(np.sqrt(np.sum(np.abs(f.values[interior]) ** 2) * f.grid.dx * f.grid.dp))
    return {'sup': sup, 'l2': l2, 'location_of_max': (float(f.grid.x[i]), float(f.grid.p[j]))}
