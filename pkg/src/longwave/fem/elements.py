"""Lagrange reference elements on the unit triangle for degree r in {1, 2, 3}.

Local node order: the 3 vertices, then r-1 nodes per edge (edge 0: v0->v1,
edge 1: v1->v2, edge 2: v2->v0, positions counted from the first vertex),
then interior nodes.  This order must match FunctionSpace's global numbering.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import InvalidArgumentError

__all__ = ["ReferenceElement", "reference_element", "lattice_nodes"]

_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_EDGES = ((0, 1), (1, 2), (2, 0))


def lattice_nodes(degree):
    """Reference nodes in local order: vertices, edge nodes, interior nodes."""
    r = degree
    nodes = [tuple(v) for v in _VERTICES]
    for (a, b) in _EDGES:
        va, vb = _VERTICES[a], _VERTICES[b]
        for k in range(1, r):
            nodes.append(tuple(va + (vb - va) * (k / r)))
    # Interior lattice points (i/r, j/r), i,j >= 1, i+j <= r-1.
    for j in range(1, r):
        for i in range(1, r - j):
            nodes.append((i / r, j / r))
    return np.asarray(nodes)


def _monomial_powers(degree):
    return [(a, b) for total in range(degree + 1) for a in range(total, -1, -1) for b in [total - a]]


class ReferenceElement:
    """Nodal Lagrange basis via a monomial Vandermonde inverse."""

    def __init__(self, degree):
        if degree not in (1, 2, 3):
            raise InvalidArgumentError("supported Lagrange degrees are 1, 2, 3")
        self.degree = degree
        self.nodes = lattice_nodes(degree)
        self.n_local = len(self.nodes)
        self.powers = _monomial_powers(degree)
        V = np.array([[x**a * y**b for (a, b) in self.powers] for x, y in self.nodes])
        self.coeffs = np.linalg.inv(V)  # basis_j = sum_k coeffs[k, j] * mono_k
        self.n_edge = degree - 1
        self.n_interior = self.n_local - 3 - 3 * self.n_edge

    def eval(self, points):
        """Basis values, shape (npts, n_local)."""
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        mono = np.stack([x**a * y**b for (a, b) in self.powers], axis=1)
        return mono @ self.coeffs

    def grad(self, points):
        """Reference gradients, shape (npts, n_local, 2)."""
        pts = np.atleast_2d(points)
        x, y = pts[:, 0], pts[:, 1]
        dx = np.stack(
            [a * x ** max(a - 1, 0) * y**b if a else np.zeros_like(x) for (a, b) in self.powers],
            axis=1,
        )
        dy = np.stack(
            [b * x**a * y ** max(b - 1, 0) if b else np.zeros_like(x) for (a, b) in self.powers],
            axis=1,
        )
        return np.stack([dx @ self.coeffs, dy @ self.coeffs], axis=2)


@lru_cache(maxsize=None)
def reference_element(degree):
    return ReferenceElement(degree)
