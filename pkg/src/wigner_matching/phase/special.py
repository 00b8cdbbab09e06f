"""
Complex error functions built on the Faddeeva function w(z) = exp(-z**2) erfc(-iz).

`faddeeva` follows the Poppe-Wijers scheme: a power series near the origin
and a Gautschi continued fraction, Taylor-accelerated in the intermediate
region, elsewhere. Everything is vectorized over numpy arrays.
"""
import math

import numpy as np

from wigner_matching.exceptions import NonFiniteException

TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
SERIES_RADIUS = 0.085264
ERF_SERIES_RADIUS = 0.5
ERF_SERIES_TERMS = 24


def _first_quadrant(xabs, yabs):
    """w at xabs + i*yabs with xabs, yabs >= 0."""
    x = xabs / 6.3
    y = yabs / 4.4
    qrho = x * x + y * y
    xquad = xabs * xabs - yabs * yabs
    yquad = 2.0 * xabs * yabs
    out = np.empty(xabs.shape, dtype=complex)

    near = qrho < SERIES_RADIUS
    if near.any():
        xa, ya, xq, yq = xabs[near], yabs[near], xquad[near], yquad[near]
        q = (1.0 - 0.85 * y[near]) * np.sqrt(qrho[near])
        terms = np.rint(6.0 + 72.0 * q).astype(int)
        j = 2.0 * terms + 1.0
        xsum = 1.0 / j
        ysum = np.zeros_like(xsum)
        for i in range(int(terms.max()), 0, -1):
            active = i <= terms
            j = np.where(active, j - 2.0, j)
            xaux = (xsum * xq - ysum * yq) / i
            ynew = (xsum * yq + ysum * xq) / i
            xsum = np.where(active, xaux + 1.0 / j, xsum)
            ysum = np.where(active, ynew, ysum)
        u1 = -TWO_OVER_SQRT_PI * (xsum * ya + ysum * xa) + 1.0
        v1 = TWO_OVER_SQRT_PI * (xsum * xa - ysum * ya)
        decay = np.exp(-xq)
        u2 = decay * np.cos(yq)
        v2 = -decay * np.sin(yq)
        out[near] = (u1 * u2 - v1 * v2) + 1j * (u1 * v2 + v1 * u2)

    far = ~near
    if far.any():
        xa, ya, q2 = xabs[far], yabs[far], qrho[far]
        outer = q2 > 1.0
        h = np.zeros_like(q2)
        kapn = np.zeros(q2.shape, dtype=int)
        nu = np.zeros(q2.shape, dtype=int)
        rho = np.sqrt(q2[outer])
        nu[outer] = (3.0 + 1442.0 / (26.0 * rho + 77.0)).astype(int)
        inner = ~outer
        q = (1.0 - y[far][inner]) * np.sqrt(1.0 - q2[inner])
        h[inner] = 1.88 * q
        kapn[inner] = np.rint(7.0 + 34.0 * q).astype(int)
        nu[inner] = np.rint(16.0 + 26.0 * q).astype(int)
        accelerated = h > 0.0
        h2 = 2.0 * h
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            qlambda = np.where(accelerated, h2 ** kapn, 0.0)
        rx = np.zeros_like(q2)
        ry = np.zeros_like(q2)
        sx = np.zeros_like(q2)
        sy = np.zeros_like(q2)
        for n in range(int(nu.max()), -1, -1):
            active = n <= nu
            tx = ya + h + (n + 1) * rx
            ty = xa - (n + 1) * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = np.where(active, c * tx, rx)
            ry = np.where(active, c * ty, ry)
            step = active & accelerated & (n <= kapn)
            tx = qlambda + sx
            sx_new = rx * tx - ry * sy
            sy_new = ry * tx + rx * sy
            sx = np.where(step, sx_new, sx)
            sy = np.where(step, sy_new, sy)
            with np.errstate(divide='ignore', invalid='ignore'):
                qlambda = np.where(step, qlambda / np.where(accelerated, h2, 1.0), qlambda)
        u = np.where(accelerated, sx, rx) * TWO_OVER_SQRT_PI
        v = np.where(accelerated, sy, ry) * TWO_OVER_SQRT_PI
        u = np.where(ya == 0.0, np.exp(-xa * xa), u)
        out[far] = u + 1j * v
    return out


def faddeeva(z):
    """
    Faddeeva function w(z) = exp(-z**2) erfc(-iz)
    :param z: complex scalar or array, finite
    :return: w(z), same shape as z
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise NonFiniteException('faddeeva argument')
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    x, y = z.real, z.imag
    w = _first_quadrant(np.abs(x), np.abs(y))
    upper = y >= 0.0
    out = np.empty(z.shape, dtype=complex)
    out[upper] = np.where(x[upper] >= 0.0, w[upper], np.conj(w[upper]))
    lower = ~upper
    if lower.any():
        # w(-z) lies in the upper half plane; w(z) = 2 exp(-z^2) - w(-z)
        zl = z[lower]
        reflected = np.where(x[lower] <= 0.0, w[lower], np.conj(w[lower]))
        with np.errstate(over='ignore', invalid='ignore'):
            out[lower] = 2.0 * np.exp(-zl * zl) - reflected
    return out[0] if scalar else out


def erfcx(z):
    """Scaled complementary error function exp(z**2) erfc(z) = w(iz)."""
    return faddeeva(1j * np.asarray(z, dtype=complex))


def erfc(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(over='ignore', invalid='ignore'):
        return np.exp(-z * z) * erfcx(z)


def _erf_series(z):
    total = np.zeros_like(z)
    power = z.copy()
    z2 = z * z
    for n in range(ERF_SERIES_TERMS):
        total = total + power / (math.factorial(n) * (2 * n + 1))
        power = -power * z2
    return TWO_OVER_SQRT_PI * total


def erf(z):
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < ERF_SERIES_RADIUS
    out[small] = _erf_series(z[small])
    big = ~small
    if big.any():
        # erf is odd; evaluate in the right half plane where erfc cannot approach 2
        zb = z[big]
        flip = zb.real < 0.0
        za = np.where(flip, -zb, zb)
        value = 1.0 - erfc(za)
        out[big] = np.where(flip, -value, value)
    return out[0] if scalar else out


def circle_mean(func, center, radius: float = 1e-2, points: int = 16):
    """
    Value at `center` of a function analytic in a punctured disc with a removable
    singularity, taken as the mean over a circle around it. Only Taylor terms of
    index divisible by `points` survive the mean, so the error is O(radius**points).
    :param func: vectorized complex function of one argument
    :param center: array of centres
    :return: array shaped like `center`
    """
    center = np.asarray(center, dtype=complex)
    theta = 2.0 * np.pi * (np.arange(points) + 0.5) / points
    ring = center[..., None] + radius * np.exp(1j * theta)
    return np.mean(func(ring), axis=-1)
