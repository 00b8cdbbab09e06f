"""
Derivative backends on uniform phase-space grids.

A backend turns a SampledSymbol into the array of a partial derivative
d^a/dx^a d^b/dp^b together with the mask of cells that result is not
trustworthy on (one-sided stencils, tapered spectral margins, or masked input
cells smeared by the stencil).
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import ndimage
from scipy.signal import windows

from wigner_matching.exceptions import WignerMatchingException
from wigner_matching.phase import SampledSymbol

MAX_ORDER = 6
FD_ORDERS = (2, 4, 6)
MAX_TAPER = 0.25

logger = logging.getLogger(__name__)


def _axis_index(axis):
    if axis in (0, 'x'):
        return 0
    if axis in (1, 'p'):
        return 1
    raise WignerMatchingException(f'Unknown axis {axis!r}; expected "x" or "p".')


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple, n: int):
    """
    Weights w_j with sum_j w_j f(x + offsets[j] h) = h**n f^(n)(x) + O(h**(len - n))
    :param offsets: integer stencil offsets
    :param n: derivative order
    :return: weight array
    """
    offsets = np.asarray(offsets, dtype=float)
    size = len(offsets)
    vander = np.array([offsets ** m / math.factorial(m) for m in range(size)])
    rhs = np.zeros(size)
    rhs[n] = 1.0
    return np.linalg.solve(vander, rhs)


def _dilate(mask, axis, width):
    if width <= 0 or not mask.any():
        return mask
    structure = np.zeros((3, 3), dtype=bool)
    structure[1, 1] = True
    if axis == 0:
        structure[:, 1] = True
    else:
        structure[1, :] = True
    return ndimage.binary_dilation(mask, structure=structure, iterations=width)


def taper_window(size: int, fraction: float):
    """
    Cosine (Hann) taper: 1 in the middle, rising from 0 at both ends over
    `fraction * size` points per side; returns (window, margin mask).
    """
    window = np.ones(size)
    margin = np.zeros(size, dtype=bool)
    width = int(math.ceil(fraction * size))
    if width <= 0:
        return window, margin
    ramp = windows.hann(2 * width, sym=False)[:width]
    window[:width] = ramp
    window[size - width:] = ramp[::-1]
    margin[:width] = True
    margin[size - width:] = True
    return window, margin


class DerivativeBackend(object):
    """Base class; subclasses implement `_derivative_along`."""
    kind = 'abstract'

    def derivative_along(self, values, axis: int, n: int, spacing: float):
        """:return: (derivative values, margin mask) for a plain complex array"""
        if n == 0:
            return values, np.zeros(values.shape, dtype=bool)
        return self._derivative_along(values, axis, n, spacing)

    def _derivative_along(self, values, axis, n, spacing):
        raise NotImplementedError()

    def stencil_radius(self, n: int) -> int:
        return 0

    def partial(self, f: SampledSymbol, a: int, b: int):
        """
        Mixed partial d^a/dx^a d^b/dp^b of f
        :return: (values, mask)
        """
        values = f.values
        mask = f.mask
        for axis, n, spacing in ((0, a, f.grid.dx), (1, b, f.grid.dp)):
            if n == 0:
                continue
            values, margin = self._derivative_along(values, axis, n, spacing)
            mask = _dilate(mask, axis, self.stencil_radius(n)) | margin
        return values, mask

    def to_json(self):
        return {'kind': self.kind}

    def __repr__(self):
        return f'{type(self).__name__}({self.to_json()})'


class FiniteDifferenceBackend(DerivativeBackend):
    """Central differences of accuracy order 2, 4 or 6 with one-sided closures at the edges."""
    kind = 'fd'

    def __init__(self, order: int = 4):
        if order not in FD_ORDERS:
            raise WignerMatchingException(f'Finite difference order must be one of {FD_ORDERS}, got {order}.')
        self.order = order

    def stencil_radius(self, n: int) -> int:
        return (n + 1) // 2 - 1 + self.order // 2

    def _derivative_along(self, values, axis, n, spacing):
        values = np.moveaxis(np.asarray(values), axis, 0)
        size = values.shape[0]
        if size < n + 1:
            raise WignerMatchingException(f'{size} points cannot carry a derivative of order {n}.')
        radius = self.stencil_radius(n)
        out = np.zeros(values.shape, dtype=complex)
        margin = np.zeros(size, dtype=bool)
        if 2 * radius + 1 <= size:
            weights = fd_weights(tuple(range(-radius, radius + 1)), n)
            for w, offset in zip(weights, range(-radius, radius + 1)):
                out[radius:size - radius] += w * values[radius + offset:size - radius + offset]
            edge_rows = list(range(radius)) + list(range(size - radius, size))
        else:
            edge_rows = list(range(size))
        width = min(n + self.order, size)
        for row in edge_rows:
            start = min(max(row - width // 2, 0), size - width)
            offsets = tuple(range(start - row, start - row + width))
            weights = fd_weights(offsets, n)
            out[row] = np.tensordot(weights, values[start:start + width], axes=(0, 0))
            margin[row] = True
        out /= spacing ** n
        margin_2d = np.broadcast_to(margin.reshape((-1,) + (1,) * (values.ndim - 1)), values.shape)
        return np.moveaxis(out, 0, axis), np.moveaxis(np.array(margin_2d), 0, axis)

    def to_json(self):
        return {'kind': self.kind, 'order': self.order}


class SpectralBackend(DerivativeBackend):
    """
    Fourier differentiation of the tapered field; the window is treated as one
    period, and the tapered margins are masked.
    """
    kind = 'spectral'

    def __init__(self, taper: float = 0.25):
        if not 0.0 <= taper <= MAX_TAPER:
            raise WignerMatchingException(f'Taper fraction must lie in [0, {MAX_TAPER}], got {taper}.')
        self.taper = taper

    def _derivative_along(self, values, axis, n, spacing):
        values = np.moveaxis(np.asarray(values), axis, 0)
        size = values.shape[0]
        window, margin = taper_window(size, self.taper)
        shape = (-1,) + (1,) * (values.ndim - 1)
        wave = 2.0 * np.pi * np.fft.fftfreq(size, d=spacing)
        factor = (1j * wave) ** n
        if size % 2 == 0 and n % 2 == 1:
            factor[size // 2] = 0.0
        spectrum = np.fft.fft(values * window.reshape(shape), axis=0)
        out = np.fft.ifft(spectrum * factor.reshape(shape), axis=0)
        margin_2d = np.broadcast_to(margin.reshape(shape), values.shape)
        return np.moveaxis(out, 0, axis), np.moveaxis(np.array(margin_2d), 0, axis)

    def stencil_radius(self, n: int) -> int:
        return 0

    def to_json(self):
        return {'kind': self.kind, 'taper': self.taper}


class AnalyticBackend(DerivativeBackend):
    """
    Exact derivatives from a callable `source(a, b, xx, pp)`; symbols handed to
    `partial` must be samples of that same source on their grid.
    """
    kind = 'analytic'

    def __init__(self, source: Callable, label: Optional[str] = None):
        self.source = source
        self.label = label or getattr(source, '__name__', 'analytic')

    def partial(self, f: SampledSymbol, a: int, b: int):
        if a == 0 and b == 0:
            return f.values, f.mask
        xx, pp = f.grid.mesh()
        values = np.broadcast_to(np.asarray(self.source(a, b, xx, pp), dtype=complex), f.grid.shape)
        return values, f.mask

    def _derivative_along(self, values, axis, n, spacing):
        raise WignerMatchingException('The analytic backend differentiates sampled symbols only through `partial`.')

    def to_json(self):
        return {'kind': self.kind, 'source': self.label}


def make_backend(spec: str) -> DerivativeBackend:
    """
    Parse a backend spec: `fd2`, `fd4`, `fd6`, `spectral` or `spectral:<taper>`
    """
    spec = spec.strip().lower()
    if spec.startswith('fd'):
        try:
            return FiniteDifferenceBackend(int(spec[2:] or 4))
        except ValueError:
            raise WignerMatchingException(f'Unrecognized finite difference backend {spec!r}.')
    if spec.startswith('spectral'):
        _, _, taper = spec.partition(':')
        try:
            return SpectralBackend(float(taper) if taper else 0.25)
        except ValueError:
            raise WignerMatchingException(f'Unrecognized spectral taper in {spec!r}.')
    raise WignerMatchingException(f'Unknown derivative backend {spec!r}.')


def derivative(f: SampledSymbol, axis, n: int, backend: DerivativeBackend) -> SampledSymbol:
    """
    n-th derivative of f along one axis
    :param f: sampled symbol
    :param axis: "x" or "p"
    :param n: order, 0..6
    :param backend: derivative backend
    :return: derivative with the backend's margin cells added to the mask
    """
    if not 0 <= n <= MAX_ORDER:
        raise WignerMatchingException(f'Derivative order {n} outside 0..{MAX_ORDER}.')
    axis = _axis_index(axis)
    a, b = (n, 0) if axis == 0 else (0, n)
    values, mask = backend.partial(f, a, b)
    if not np.all(np.isfinite(values)):
        logger.warning(f'Non-finite derivative values for {f!r} along axis {axis}')
    return SampledSymbol(f.grid, values, mask, label=f.label)
