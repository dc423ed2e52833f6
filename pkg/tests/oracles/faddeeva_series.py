"""Extended-precision oracle for w(z) = exp(-z^2) erfc(-iz).

Uses the everywhere-convergent series w(z) = sum_n (iz)^n / Gamma(n/2 + 1),
summed with mpmath at enough working precision to absorb the cancellation
(terms grow like exp(|z|^2) while w stays O(1)).

Run as a script to regenerate the frozen sample file used by the tests:

    python3 -m tests.oracles.faddeeva_series
"""
from __future__ import annotations

from pathlib import Path

import mpmath as mp
import numpy as np

DATA = Path(__file__).resolve().parent.parent / "data" / "faddeeva_oracle.npz"


def w_series(z: complex, digits: int = 40) -> complex:
    zabs = abs(z)
    # cancellation costs about |z|^2 / ln(10) digits
    with mp.workdps(digits + int(zabs * zabs / 2.3) + 10):
        iz = mp.mpc(0, 1) * mp.mpc(z.real, z.imag)
        total = mp.mpc(0)
        term_pow = mp.mpc(1)
        tol = mp.mpf(10) ** (-(digits + 5))
        n = 0
        while True:
            term = term_pow / mp.gamma(mp.mpf(n) / 2 + 1)
            total += term
            if n > 2 * zabs * zabs + 10 and abs(term) < tol * max(abs(total), mp.mpf(10) ** -300):
                break
            term_pow *= iz
            n += 1
        return complex(total)


def erfc_series(z: complex) -> complex:
    with mp.workdps(40):
        zz = mp.mpc(z.real, z.imag)
        return complex(mp.exp(-zz * zz) * w_series(complex(1j * z)))


def dawson_series(z: complex, digits: int = 40) -> complex:
    """Dawson function D(z) = sum_n (-1)^n 2^n z^(2n+1) / (2n+1)!!."""
    with mp.workdps(digits + 20):
        zz = mp.mpc(z.real, z.imag)
        total = mp.mpc(0)
        term = zz
        n = 0
        while True:
            total += term
            n += 1
            term = term * (-2 * zz * zz) / (2 * n + 1)
            if abs(term) < mp.mpf(10) ** (-(digits + 5)) and n > 4:
                break
        return complex(total)


def sample_points(n: int = 10_000, radius: float = 4.0, seed: int = 20240601) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    th = 2.0 * np.pi * rng.random(n)
    return r * np.exp(1j * th)


def generate(path: Path = DATA) -> None:
    z = sample_points()
    w = np.array([w_series(complex(x)) for x in z])
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, z=z, w=w)


if __name__ == "__main__":
    generate()
    print(f"wrote {DATA}")
