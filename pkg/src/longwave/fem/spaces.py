"""Continuous Lagrange finite element spaces on triangulations.

Global DOF numbering: mesh vertices first, then r-1 nodes per unique edge
(ordered from the lower-numbered endpoint), then cell-interior nodes.  Shared
edge/vertex DOFs therefore coincide across neighboring cells (C0 continuity).
A vector space (components=2) stores coefficients as [x-block; y-block].
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError, PointLocationError
from .elements import reference_element

__all__ = ["FunctionSpace", "evaluate_at_points", "interpolate"]

_LOC_EDGES = ((0, 1), (1, 2), (2, 0))


class FunctionSpace:
    """Lagrange space of degree r (1..3) with 1 or 2 components."""

    def __init__(self, mesh, degree, components=1):
        if components not in (1, 2):
            raise InvalidArgumentError("components must be 1 or 2")
        self.mesh = mesh
        self.degree = degree
        self.components = components
        self.element = reference_element(degree)
        self._build_dofs()
        self._geometry()
        self._tab_cache = {}

    # -- construction -------------------------------------------------------

    def _build_dofs(self):
        mesh, r = self.mesh, self.degree
        tris = mesh.triangles
        nv, nt = mesh.n_vertices, mesh.n_triangles

        pairs = np.concatenate([tris[:, e] for e in _LOC_EDGES], axis=0)
        key = np.sort(pairs, axis=1)
        edges, inverse = np.unique(key, axis=0, return_inverse=True)
        cell_edges = inverse.reshape(3, nt).T
        ne = edges.shape[0]
        self.edges = edges

        n_edge = r - 1
        n_int = self.element.n_interior
        self.n_scalar = nv + n_edge * ne + n_int * nt

        nl = self.element.n_local
        cell_dofs = np.empty((nt, nl), dtype=np.int64)
        cell_dofs[:, :3] = tris
        for le, (a, b) in enumerate(_LOC_EDGES):
            eid = cell_edges[:, le]
            forward = tris[:, a] < tris[:, b]
            for k in range(1, r):
                pos = np.where(forward, k, r - k)
                cell_dofs[:, 3 + le * n_edge + (k - 1)] = nv + eid * n_edge + (pos - 1)
        if n_int:
            base = nv + n_edge * ne
            for m in range(n_int):
                cell_dofs[:, 3 + 3 * n_edge + m] = base + np.arange(nt) * n_int + m
        self.cell_dofs = cell_dofs

        # Physical DOF coordinates and one owning cell per DOF.
        v0 = self.mesh.vertices[tris[:, 0]]
        J = self._jacobians()
        ref = self.element.nodes  # (nl, 2)
        coords_per_cell = v0[:, None, :] + np.einsum("cij,nj->cni", J, ref)
        dof_coords = np.empty((self.n_scalar, 2))
        dof_cells = np.empty(self.n_scalar, dtype=np.int64)
        flat = cell_dofs.ravel()
        dof_coords[flat] = coords_per_cell.reshape(-1, 2)
        dof_cells[flat] = np.repeat(np.arange(nt), nl)
        self.dof_coords = dof_coords
        self.dof_cells = dof_cells

    def _jacobians(self):
        p = self.mesh.vertices[self.mesh.triangles]
        return np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)

    def _geometry(self):
        J = self._jacobians()
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1] / det
        inv[:, 0, 1] = -J[:, 0, 1] / det
        inv[:, 1, 0] = -J[:, 1, 0] / det
        inv[:, 1, 1] = J[:, 0, 0] / det
        self.jacobians = J
        self.det_j = det  # positive: triangles are CCW
        self.inv_j = inv

    def boundary_scalar_dofs(self):
        """Scalar DOF indices lying on the mesh boundary (vertices + edge nodes)."""
        nv = self.mesh.n_vertices
        r = self.degree
        out = set(np.unique(self.mesh.facet_vertices).tolist())
        if r > 1:
            enc = self.edges[:, 0] * (nv + 1) + self.edges[:, 1]
            order = np.argsort(enc)
            fk = np.sort(self.mesh.facet_vertices, axis=1)
            fenc = fk[:, 0] * (nv + 1) + fk[:, 1]
            pos = order[np.searchsorted(enc[order], fenc)]
            for eid in pos:
                base = nv + eid * (r - 1)
                out.update(range(base, base + r - 1))
        return np.asarray(sorted(out), dtype=np.int64)

    # -- sizes ---------------------------------------------------------------

    @property
    def dim(self):
        return self.components * self.n_scalar

    def zeros(self):
        return np.zeros(self.dim)

    def component(self, coeffs, c):
        return coeffs[c * self.n_scalar : (c + 1) * self.n_scalar]

    # -- tabulation at quadrature points --------------------------------------

    def tabulate(self, rule):
        """Cache (phi, grad_phys, X, W) for a TriangleRule.

        phi: (q, nl); grad_phys: (nc, q, nl, 2); X: (nc, q, 2) physical
        points; W: (nc, q) physical weights.
        """
        key = (rule.degree, rule.points.shape[0])
        hit = self._tab_cache.get(key)
        if hit is not None:
            return hit
        phi = self.element.eval(rule.points)
        dref = self.element.grad(rule.points)
        # grad_phys[c,q,n,i] = invJ[c,k,i] * dref[q,n,k]  (J^{-T} rule)
        grad = np.einsum("cki,qnk->cqni", self.inv_j, dref)
        v0 = self.mesh.vertices[self.mesh.triangles[:, 0]]
        X = v0[:, None, :] + np.einsum("cij,qj->cqi", self.jacobians, rule.points)
        W = rule.weights[None, :] * self.det_j[:, None]
        out = (phi, grad, X, W)
        self._tab_cache[key] = out
        return out

    # -- pointwise evaluation --------------------------------------------------

    def reference_coords(self, cells, points):
        """Map physical points to reference coordinates of given cells."""
        v0 = self.mesh.vertices[self.mesh.triangles[cells, 0]]
        d = points - v0
        inv = self.inv_j[cells]
        # xref_k = inv[k, i]... inverse map uses J^{-1}: xref = J^{-1} d
        J = self.jacobians[cells]
        det = self.det_j[cells]
        xr = (J[:, 1, 1] * d[:, 0] - J[:, 0, 1] * d[:, 1]) / det
        yr = (-J[:, 1, 0] * d[:, 0] + J[:, 0, 0] * d[:, 1]) / det
        del inv
        return np.stack([xr, yr], axis=1)

    def locate(self, points, tol=1e-10):
        """Find a containing cell for each point; PointLocationError if none."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cells = np.empty(pts.shape[0], dtype=np.int64)
        tris = self.mesh.triangles
        v = self.mesh.vertices
        p0, p1, p2 = v[tris[:, 0]], v[tris[:, 1]], v[tris[:, 2]]
        det = self.det_j
        for i, p in enumerate(pts):
            b1 = ((p1[:, 1] - p2[:, 1]) * (p[0] - p2[:, 0]) + (p2[:, 0] - p1[:, 0]) * (p[1] - p2[:, 1])) / det
            b2 = ((p2[:, 1] - p0[:, 1]) * (p[0] - p2[:, 0]) + (p0[:, 0] - p2[:, 0]) * (p[1] - p2[:, 1])) / det
            b3 = 1.0 - b1 - b2
            ok = (b1 >= -tol) & (b2 >= -tol) & (b3 >= -tol)
            idx = np.flatnonzero(ok)
            if idx.size == 0:
                raise PointLocationError(f"point {tuple(p)} lies outside the mesh")
            cells[i] = idx[0]
        return cells

    def eval_cells(self, coeffs, cells, points):
        """Evaluate the FE function at physical `points` known to lie in `cells`."""
        ref = self.reference_coords(cells, np.atleast_2d(points))
        phi = self.element.eval(ref)  # (np, nl)
        dofs = self.cell_dofs[cells]  # (np, nl)
        if self.components == 1:
            return np.einsum("pn,pn->p", phi, coeffs[dofs])
        out = np.empty((len(cells), 2))
        for c in range(2):
            block = self.component(coeffs, c)
            out[:, c] = np.einsum("pn,pn->p", phi, block[dofs])
        return out


def scalar_twin(space):
    """Scalar space sharing a vector space's mesh, degree and DOF layout."""
    if space.components == 1:
        return space
    twin = getattr(space, "_scalar_twin", None)
    if twin is None:
        twin = FunctionSpace(space.mesh, space.degree)
        space._scalar_twin = twin
    return twin


def evaluate_at_points(space, coeffs, points):
    """FE interpolation at arbitrary in-domain points (point location included)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cells = space.locate(pts)
    return space.eval_cells(np.asarray(coeffs, dtype=float), cells, pts)


def interpolate(space, f):
    """Nodal interpolation: coefficients are f evaluated at the DOF coordinates."""
    x, y = space.dof_coords[:, 0], space.dof_coords[:, 1]
    vals = np.asarray(f(x, y), dtype=float)
    if space.components == 1:
        if vals.shape != x.shape:
            raise InvalidArgumentError("scalar interpolant must return one value per point")
        return vals.copy()
    if vals.shape != (x.size, 2):
        raise InvalidArgumentError("vector interpolant must return (n, 2) values")
    return np.concatenate([vals[:, 0], vals[:, 1]])
