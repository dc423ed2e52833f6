"""Composite Gauss-Legendre rules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["leggauss", "gauss_legendre_panels", "symmetric_panel_rule"]


@lru_cache(maxsize=64)
def _leggauss_cached(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def leggauss(order: int):
    return _leggauss_cached(int(order))


def gauss_legendre_panels(edges, order: int):
    """Nodes and weights of a composite rule with panels between consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = leggauss(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = (b - a) / 2.0
    nodes = (a + b) / 2.0 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def symmetric_panel_rule(breakpoints, lo: float, hi: float, max_panel: float, order: int):
    """Composite rule on [lo, hi] honoring breakpoints, each interval cut into
    equal panels no longer than ``max_panel``.

    When the interval set is symmetric about 0 the rule is built on the positive
    half and mirrored, so nodes and weights are exactly symmetric.
    """
    bps = np.asarray(breakpoints, dtype=float)
    bps = bps[(bps > lo) & (bps < hi)]
    pts = np.unique(np.concatenate(([lo, hi], bps)))
    if lo == -hi and np.array_equal(pts, -pts[::-1]):
        pos = pts[pts >= 0]
        if pos[0] != 0.0:
            pos = np.concatenate(([0.0], pos))
        n, w = _rule_on(pos, max_panel, order)
        return np.concatenate((-n[::-1], n)), np.concatenate((w[::-1], w))
    return _rule_on(pts, max_panel, order)


def _rule_on(pts, max_panel, order):
    lengths = np.diff(pts)
    counts = np.maximum(1, np.ceil(lengths / max_panel).astype(int))
    if np.all(counts == 1):
        return gauss_legendre_panels(pts, order)
    edges = [pts[0]]
    for a, b, c in zip(pts[:-1], pts[1:], counts):
        edges.extend((a + (b - a) * np.arange(1, c + 1) / c).tolist())
        edges[-1] = b
    return gauss_legendre_panels(np.asarray(edges), order)
