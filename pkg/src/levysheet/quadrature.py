"""Gauss-Legendre / Gauss-Hermite quadrature helpers.

All rules are returned as (nodes, weights) float arrays. Composite rules
concatenate per-panel Gauss-Legendre nodes, which keeps integrands with
moderate oscillation (Hermite functions, Fourier kernels) cheap and exact
to machine precision for polynomials on each panel.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss


def gauss_legendre(a: float, b: float, n: int = 64):
    """Gauss-Legendre rule with n nodes on [a, b]."""
    x, w = leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def composite_gauss_legendre(a: float, b: float, nodes_per_unit: int = 32,
                             min_nodes: int = 16, max_panels: int = 512):
    """Composite GL rule on [a, b] with roughly nodes_per_unit nodes per
    unit length, split into unit-length panels."""
    if b <= a:
        return np.empty(0), np.empty(0)
    n_panels = min(max(1, int(np.ceil(b - a))), max_panels)
    edges = np.linspace(a, b, n_panels + 1)
    per_panel = max(min_nodes, int(np.ceil(nodes_per_unit * (b - a) / n_panels)))
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(lo, hi, per_panel)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def gauss_hermite_probabilists(n: int):
    """Nodes/weights for integrals against exp(-x^2/2) dx (unnormalized)."""
    return hermegauss(n)


def tensor_rule(rules):
    """Tensor product of 1-d (nodes, weights) rules.

    Returns (points, weights) with points of shape (N, dim).
    """
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    w = np.ones(pts.shape[0])
    for g in wgrids:
        w = w * g.ravel()
    return pts, w


def box_rule(lower, upper, nodes_per_unit: int = 32):
    """Tensor composite-GL rule over a box given by corner arrays."""
    rules = [composite_gauss_legendre(lo, hi, nodes_per_unit)
             for lo, hi in zip(lower, upper)]
    return tensor_rule(rules)
