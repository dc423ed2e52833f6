"""Schmidt number by cyclic Jacobi eigen-iteration of rho = J J^T (real J).

Independent of LAPACK's SVD: rotations are applied in plain numpy until the
off-diagonal mass is below tolerance; K = (sum mu)^2 / sum mu^2.
"""
from __future__ import annotations

import numpy as np


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, np.sum(a * a) - np.sum(np.diag(a) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    return np.diag(a).copy()


def schmidt_number_jacobi(j: np.ndarray) -> float:
    rho = j @ j.T
    mu = jacobi_eigenvalues(rho)
    return float(np.sum(mu) ** 2 / np.sum(mu * mu))


def double_gaussian(sigma_plus: float, sigma_minus: float, n: int = 40, half_span: float | None = None):
    """Real JSA exp(-w+^2/(4 s+^2)) exp(-w-^2/(4 s-^2)) on an n x n grid."""
    if half_span is None:
        half_span = 2.5 * max(sigma_plus, sigma_minus) * 1.5
    x = np.linspace(-half_span, half_span, n)
    ws, wi = np.meshgrid(x, x, indexing="ij")
    return np.exp(-((ws + wi) ** 2) / (4 * sigma_plus**2) - ((ws - wi) ** 2) / (4 * sigma_minus**2))
