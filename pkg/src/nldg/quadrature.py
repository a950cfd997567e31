"""Gauss-Legendre helpers shared by assembly, projection and error evaluation."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_rule(n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_on(a, b, n):
    """Gauss-Legendre nodes/weights mapped to the interval (a, b)."""
    x, w = gauss_rule(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def gauss_panels(edges, n):
    """Composite rule over consecutive panels given by `edges` (ascending)."""
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    x, w = gauss_rule(n)
    half = 0.5 * (hi - lo)
    nodes = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_edges(a, b, n_sub):
    """Geometric subdivision of (a, b) accumulating toward a; requires a > 0."""
    if a <= 0.0:
        raise ValueError("graded_edges needs a strictly positive left endpoint")
    return np.geomspace(a, b, n_sub + 1)


def integrate_graded(func, a, b, n_sub=30, npts=12, refinements=0):
    """Composite Gauss on geometrically graded panels toward a.

    `func` must accept a vector of nodes.  `refinements` splits every panel
    into 2**refinements equal parts, which is how callers estimate
    convergence of integrands with algebraic endpoint behavior.
    """
    edges = graded_edges(a, b, n_sub)
    if refinements:
        pieces = [np.linspace(edges[i], edges[i + 1], 2 ** refinements + 1)
                  for i in range(len(edges) - 1)]
        edges = np.unique(np.concatenate(pieces))
    nodes, weights = gauss_panels(edges, npts)
    return float(np.dot(weights, func(nodes)))
