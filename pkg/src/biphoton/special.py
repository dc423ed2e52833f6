"""Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the complex erfc.

Inside |z| < 8 (upper half-plane) we use Weideman's rational approximation
with FFT-derived coefficients; outside that radius a Laplace continued
fraction is used. The lower half-plane follows from
w(z) = 2 exp(-z^2) - w(-z), and the reflection w(-conj z) = conj w(z) is
imposed exactly by evaluating only for Re z >= 0.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidArgument

__all__ = ["faddeeva", "erfc_complex", "SPLIT_RADIUS"]

SPLIT_RADIUS = 8.0
_SQRT_PI_INV = 1.0 / np.sqrt(np.pi)
_N_WEIDEMAN = 40
_CF_DEPTH = 60


@lru_cache(maxsize=None)
def _weideman_coefficients(n: int) -> tuple[float, np.ndarray]:
    m = 2 * n
    m2 = 2 * m
    k = np.arange(-m + 1, m)
    scale = np.sqrt(n / np.sqrt(2.0))
    theta = k * np.pi / m
    t = scale * np.tan(theta / 2.0)
    f = np.exp(-t * t) * (scale * scale + t * t)
    f = np.concatenate(([0.0], f))
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / m2
    a = a[1 : n + 1][::-1]
    return scale, a


def _w_weideman(z: np.ndarray) -> np.ndarray:
    scale, a = _weideman_coefficients(_N_WEIDEMAN)
    iz = 1j * z
    den = scale - iz
    big_z = (scale + iz) / den
    p = np.zeros_like(big_z)
    for coef in a:  # Horner
        p = p * big_z + coef
    return 2.0 * p / (den * den) + _SQRT_PI_INV / den


def _w_continued_fraction(z: np.ndarray) -> np.ndarray:
    # w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))
    acc = np.zeros_like(z)
    for k in range(_CF_DEPTH, 0, -1):
        acc = (k / 2.0) / (z - acc)
    return 1j * _SQRT_PI_INV / (z - acc)


def _w_upper(z: np.ndarray) -> np.ndarray:
    """Faddeeva for Im z >= 0 and Re z >= 0."""
    out = np.empty_like(z)
    near = np.abs(z) < SPLIT_RADIUS
    if near.any():
        out[near] = _w_weideman(z[near])
    if (~near).any():
        out[~near] = _w_continued_fraction(z[~near])
    return out


def faddeeva(z):
    """Faddeeva function w(z) = exp(-z**2) * erfc(-1j*z).

    Accepts scalars or arrays; returns the same shape (complex).
    """
    zarr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(zarr)):
        raise InvalidArgument("faddeeva: non-finite argument")
    scalar = zarr.ndim == 0
    zf = np.atleast_1d(zarr).ravel()

    flip = zf.real < 0
    # reflection: w(-conj z) = conj w(z); work with Re z >= 0
    zr = np.where(flip, -np.conj(zf), zf)
    lower = zr.imag < 0
    # lower half-plane: w(z) = 2 exp(-z^2) - w(-z), and w(-z) = conj w(conj z)
    zu = np.where(lower, np.conj(zr), zr)
    wu = _w_upper(zu)
    res = wu.copy()
    if lower.any():
        zl = zr[lower]
        res[lower] = 2.0 * np.exp(-zl * zl) - np.conj(wu[lower])
    res = np.where(flip, np.conj(res), res)
    res = res.reshape(zarr.shape) if not scalar else res[0]
    return complex(res) if scalar else res


def erfc_complex(z):
    """Complementary error function for complex argument, via erfc(z) = exp(-z^2) w(iz)."""
    zarr = np.asarray(z, dtype=complex)
    res = np.exp(-zarr * zarr) * faddeeva(1j * zarr)
    return complex(res) if zarr.ndim == 0 else res
