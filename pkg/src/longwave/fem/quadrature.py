"""Quadrature rules on the reference triangle {x>=0, y>=0, x+y<=1} and on edges.

Symmetric Gauss tables cover exactness <= 5; higher degrees use a conical
product (Gauss-Jacobi x Gauss-Legendre) rule, positive and exact by
construction for any requested degree.  Weights sum to the reference area 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..errors import InvalidArgumentError

__all__ = ["TriangleRule", "triangle_rule", "edge_rule"]


@dataclass(frozen=True)
class TriangleRule:
    degree: int
    points: np.ndarray  # (q, 2) reference coordinates
    weights: np.ndarray  # (q,), sum = 1/2


def _orbit3(a):
    return [(a, a), (1.0 - 2.0 * a, a), (a, 1.0 - 2.0 * a)]


def _table(degree):
    if degree <= 1:
        return [(1.0 / 3.0, 1.0 / 3.0)], [1.0]
    if degree == 2:
        return _orbit3(1.0 / 6.0), [1.0 / 3.0] * 3
    if degree <= 4:
        pts = _orbit3(0.445948490915965) + _orbit3(0.091576213509771)
        wts = [0.223381589678011] * 3 + [0.109951743655322] * 3
        return pts, wts
    if degree == 5:
        s15 = np.sqrt(15.0)
        pts = [(1.0 / 3.0, 1.0 / 3.0)]
        pts += _orbit3((6.0 + s15) / 21.0) + _orbit3((6.0 - s15) / 21.0)
        wts = [9.0 / 40.0]
        wts += [(155.0 + s15) / 1200.0] * 3 + [(155.0 - s15) / 1200.0] * 3
        return pts, wts
    return None


def _conical(degree):
    n = (degree + 2) // 2  # 2n-1 >= degree
    tj, wj = roots_jacobi(n, 1.0, 0.0)
    tl, wl = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (tj + 1.0)
    v = 0.5 * (tl + 1.0)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wj, wl) / 8.0
    pts = np.stack([U.ravel(), (V * (1.0 - U)).ravel()], axis=1)
    return pts, W.ravel()


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Smallest available rule integrating total degree <= `degree` exactly."""
    if degree < 0:
        raise InvalidArgumentError("quadrature degree must be nonnegative")
    tab = _table(degree)
    if tab is not None:
        pts, wts = tab
        points = np.asarray(pts, dtype=float)
        weights = 0.5 * np.asarray(wts, dtype=float)
    else:
        points, weights = _conical(degree)
    points.setflags(write=False)
    weights.setflags(write=False)
    return TriangleRule(degree=degree, points=points, weights=weights)


@lru_cache(maxsize=None)
def edge_rule(degree):
    """Gauss-Legendre points/weights on [0, 1] exact for degree `degree`."""
    n = max(1, (degree + 2) // 2)
    t, w = np.polynomial.legendre.leggauss(n)
    pts = 0.5 * (t + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts
