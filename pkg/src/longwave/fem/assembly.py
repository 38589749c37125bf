"""Assembly of the bilinear forms and load vectors of the long-wave systems.

The momentum (dispersive) operator for the grad-div family reads, after
integration by parts of (E(u), v) with E(u) = u + b1*D*grad(div(D u)) +
b2*D^2*grad(div u):

    A(u, v) = (u, v) + cA*(div(Du), div(Dv)) + b2*(u.gD, v.gD)
              + b2*(u.gD, div(Dv)) - b2*(div(Du), v.gD),        cA = -(b1+b2)

plus, on boundary facets, the consistency terms produced by the integration
by parts, their symmetrization, and a penalty (cA*C_N/h_f)<Du.n, Dv.n> that
enforces the slip condition weakly.  The simplified (Laplacian) model instead
uses (u,v) + (1/3)(D^2 grad u, grad v) + (1/3)((grad(D^2).grad)u, v) with
strong zero-Dirichlet rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgumentError
from ..sparse import SparseMatrix, cg_solve
from .quadrature import edge_rule, triangle_rule

__all__ = [
    "assemble_mass_matrix",
    "assemble_weighted_stiffness",
    "assemble_directional_stiffness",
    "assemble_mass_operator",
    "assemble_momentum_operator",
    "assemble_load",
    "assemble_gradient_load",
    "mass_form_applied",
    "momentum_form_applied",
    "constrained_dofs",
    "apply_dirichlet",
    "l2_project",
    "integrate_field",
    "error_norms",
    "ErrorNorms",
    "scalar_values",
    "vector_values",
    "default_quadrature",
    "FacetData",
    "facet_data",
]


def default_quadrature(space):
    return 2 * space.degree + 2


def _scatter(space, E, vector=False):
    """Turn per-cell element matrices into global CSR triplets."""
    dofs = space.cell_dofs
    nl = dofs.shape[1]
    n = space.n_scalar
    if not vector:
        rows = np.repeat(dofs, nl, axis=1).ravel()
        cols = np.tile(dofs, (1, nl)).ravel()
        return rows, cols, E.reshape(-1), n
    vdofs = np.concatenate([dofs, dofs + n], axis=1)
    m = 2 * nl
    rows = np.repeat(vdofs, m, axis=1).ravel()
    cols = np.tile(vdofs, (1, m)).ravel()
    return rows, cols, E.reshape(-1), 2 * n


def _to_matrix(rows, cols, vals, n, symmetric):
    csr = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return SparseMatrix(csr, symmetric=symmetric)


def assemble_mass_matrix(space, quad_degree=None):
    """(u, v); block diagonal over components for a vector space."""
    q = quad_degree or default_quadrature(space)
    phi, _, _, W = space.tabulate(triangle_rule(q))
    E = np.einsum("cq,qn,qm->cnm", W, phi, phi)
    rows, cols, vals, n = _scatter(space, E)
    if space.components == 1:
        return _to_matrix(rows, cols, vals, n, symmetric=True)
    rows2 = np.concatenate([rows, rows + n])
    cols2 = np.concatenate([cols, cols + n])
    return _to_matrix(rows2, cols2, np.concatenate([vals, vals]), 2 * n, symmetric=True)


def assemble_weighted_stiffness(space, weight, quad_degree=None):
    """(w * grad u, grad v) on a scalar space; `weight` is w(x, y) or a constant."""
    if space.components != 1:
        raise InvalidArgumentError("weighted stiffness expects a scalar space")
    q = quad_degree or default_quadrature(space)
    _, grad, X, W = space.tabulate(triangle_rule(q))
    w = weight(X[..., 0], X[..., 1]) if callable(weight) else float(weight)
    E = np.einsum("cq,cqni,cqmi->cnm", W * w, grad, grad)
    return _to_matrix(*_scatter(space, E), symmetric=True)


def assemble_directional_stiffness(space, direction, quad_degree=None):
    """(alpha.grad u, alpha.grad v) on a scalar space for a fixed unit direction."""
    if space.components != 1:
        raise InvalidArgumentError("directional stiffness expects a scalar space")
    d = np.asarray(direction, dtype=float)
    q = quad_degree or default_quadrature(space)
    _, grad, _, W = space.tabulate(triangle_rule(q))
    g = np.einsum("cqni,i->cqn", grad, d)
    E = np.einsum("cq,cqn,cqm->cnm", W, g, g)
    return _to_matrix(*_scatter(space, E), symmetric=True)


def assemble_mass_operator(space, bathymetry, model, quad_degree=None):
    """E_s weak form: mass matrix, plus (a~+b~)(D^2 grad eta, grad psi) for BBM.

    The BBM gradient term carries the natural zero-Neumann treatment (no
    boundary integrals).  Always symmetric positive definite.
    """
    q = quad_degree or default_quadrature(space)
    rule = triangle_rule(q)
    phi, grad, X, W = space.tabulate(rule)
    E = np.einsum("cq,qn,qm->cnm", W, phi, phi)
    kappa = model.es_coefficient
    if kappa:
        D = bathymetry.check_positive(X[..., 0], X[..., 1])
        E = E + kappa * np.einsum("cq,cqni,cqmi->cnm", W * D**2, grad, grad)
    return _to_matrix(*_scatter(space, E), symmetric=True)


@dataclass(frozen=True)
class FacetData:
    """Boundary-facet quadrature bundle for one space and quadrature degree."""

    cells: np.ndarray  # (nb,)
    normals: np.ndarray  # (nb, 2)
    lengths: np.ndarray  # (nb,)
    weights: np.ndarray  # (nb, k) physical weights
    points: np.ndarray  # (nb, k, 2)
    phi: np.ndarray  # (nb, k, nl)
    grad: np.ndarray  # (nb, k, nl, 2)
    dofs: np.ndarray  # (nb, nl)


def facet_data(space, quad_degree):
    cache = getattr(space, "_facet_cache", None)
    if cache is None:
        cache = {}
        space._facet_cache = cache
    if quad_degree in cache:
        return cache[quad_degree]
    mesh = space.mesh
    t, w = edge_rule(quad_degree)
    a = mesh.vertices[mesh.facet_vertices[:, 0]]
    b = mesh.vertices[mesh.facet_vertices[:, 1]]
    pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
    weights = mesh.facet_lengths[:, None] * w[None, :]
    cells = mesh.facet_cells
    nb, k = pts.shape[:2]
    flat = pts.reshape(-1, 2)
    ref = space.reference_coords(np.repeat(cells, k), flat)
    phi = space.element.eval(ref).reshape(nb, k, -1)
    dref = space.element.grad(ref)
    grad = np.einsum("pji,pnj->pni", space.inv_j[np.repeat(cells, k)], dref)
    grad = grad.reshape(nb, k, -1, 2)
    out = FacetData(
        cells=cells,
        normals=mesh.facet_normals,
        lengths=mesh.facet_lengths,
        weights=weights,
        points=pts,
        phi=phi,
        grad=grad,
        dofs=space.cell_dofs[cells],
    )
    cache[quad_degree] = out
    return out


def _vector_basis_arrays(phi, grad, D, gD):
    """Per-block helper arrays for the grad-div form.

    Returns (divD, p, comp) each of shape (..., 2*nl): div(D*phi) and
    phi.grad(D) per vector basis function, plus the component values.
    """
    divx = D[..., None] * grad[..., 0] + gD[..., 0:1] * phi
    divy = D[..., None] * grad[..., 1] + gD[..., 1:2] * phi
    divD = np.concatenate([divx, divy], axis=-1)
    p = np.concatenate([gD[..., 0:1] * phi, gD[..., 1:2] * phi], axis=-1)
    return divD, p


def assemble_momentum_operator(uspace, bathymetry, model, nitsche_constant=50.0, quad_degree=None):
    """Weak E operator on the vector space, with its boundary treatment.

    Grad-div models get symmetric-consistent Nitsche terms and the
    (cA*C_N/h_facet) penalty; the simplified model gets strong zero-Dirichlet
    rows/columns.  The returned matrix's `symmetric` flag is set for flat
    bottoms (the unsymmetric cross terms carry grad D).
    """
    if uspace.components != 2:
        raise InvalidArgumentError("momentum operator expects a 2-component space")
    if nitsche_constant <= 0:
        raise InvalidArgumentError("the Nitsche constant must be positive")
    q = quad_degree or default_quadrature(uspace)
    rule = triangle_rule(q)
    phi, grad, X, W = uspace.tabulate(rule)
    D = bathymetry.check_positive(X[..., 0], X[..., 1])
    gD = bathymetry.gradient(X[..., 0], X[..., 1])
    nl = phi.shape[1]
    nc = W.shape[0]

    if model.uses_laplacian:
        c = model.laplacian_coefficient
        Em = np.einsum("cq,qn,qm->cnm", W, phi, phi)
        Em = Em + c * np.einsum("cq,cqni,cqmi->cnm", W * D**2, grad, grad)
        # ((grad(D^2).grad)u, v) = (2 D gD . grad u, v), block diagonal.
        adv = 2.0 * D[..., None] * np.einsum("cqi,cqni->cqn", gD, grad)
        En = c * np.einsum("cq,qn,cqm->cnm", W, phi, adv)
        E = Em + En
        rows, cols, vals, n = _scatter(uspace, E)
        rows = np.concatenate([rows, rows + n])
        cols = np.concatenate([cols, cols + n])
        vals = np.concatenate([vals, vals])
        mat = _to_matrix(rows, cols, vals, 2 * n, symmetric=bathymetry.is_flat)
        return apply_dirichlet(mat, constrained_dofs(uspace, model))

    b1, b2 = model.beta1, model.beta2
    ca = -(b1 + b2)
    phi2 = np.broadcast_to(phi[None, :, :], (nc,) + phi.shape)
    divD, p = _vector_basis_arrays(phi2, grad, D, gD)
    E = ca * np.einsum("cq,cqn,cqm->cnm", W, divD, divD)
    if not bathymetry.is_flat:
        E += b2 * (
            np.einsum("cq,cqn,cqm->cnm", W, p, p)
            + np.einsum("cq,cqn,cqm->cnm", W, divD, p)
            - np.einsum("cq,cqn,cqm->cnm", W, p, divD)
        )
    # Component mass blocks.
    Mloc = np.einsum("cq,qn,qm->cnm", W, phi, phi)
    E[:, :nl, :nl] += Mloc
    E[:, nl:, nl:] += Mloc
    rows, cols, vals, n2 = _scatter(uspace, E, vector=True)

    fd = facet_data(uspace, q)
    Df = bathymetry(fd.points[..., 0], fd.points[..., 1])
    gDf = bathymetry.gradient(fd.points[..., 0], fd.points[..., 1])
    divDf, pf = _vector_basis_arrays(fd.phi, fd.grad, Df, gDf)
    Dn = np.concatenate(
        [
            Df[..., None] * fd.phi * fd.normals[:, None, 0:1],
            Df[..., None] * fd.phi * fd.normals[:, None, 1:2],
        ],
        axis=-1,
    )
    Ef = (b1 + b2) * (
        np.einsum("bk,bkn,bkm->bnm", fd.weights, divDf, Dn)
        + np.einsum("bk,bkn,bkm->bnm", fd.weights, Dn, divDf)
    )
    if not bathymetry.is_flat:
        Ef -= b2 * (
            np.einsum("bk,bkn,bkm->bnm", fd.weights, pf, Dn)
            + np.einsum("bk,bkn,bkm->bnm", fd.weights, Dn, pf)
        )
    pen = ca * nitsche_constant / fd.lengths
    Ef += np.einsum("b,bk,bkn,bkm->bnm", pen, fd.weights, Dn, Dn)
    n = uspace.n_scalar
    vdofs = np.concatenate([fd.dofs, fd.dofs + n], axis=1)
    m = vdofs.shape[1]
    frows = np.repeat(vdofs, m, axis=1).ravel()
    fcols = np.tile(vdofs, (1, m)).ravel()

    rows = np.concatenate([rows, frows])
    cols = np.concatenate([cols, fcols])
    vals = np.concatenate([vals, Ef.reshape(-1)])
    return _to_matrix(rows, cols, vals, n2, symmetric=bathymetry.is_flat)


def constrained_dofs(uspace, model):
    """Strong-Dirichlet DOF indices (both components) for the simplified model."""
    if not model.uses_laplacian:
        return None
    bd = uspace.boundary_scalar_dofs()
    return np.concatenate([bd, bd + uspace.n_scalar])


def apply_dirichlet(matrix, dofs):
    """Symmetric elimination: zero rows and columns, unit diagonal at `dofs`."""
    if dofs is None or len(dofs) == 0:
        return matrix
    n = matrix.n
    keep = np.ones(n)
    keep[dofs] = 0.0
    P = sp.diags(keep)
    fixed = sp.coo_matrix((np.ones(len(dofs)), (dofs, dofs)), shape=(n, n))
    csr = (P @ matrix.scipy() @ P + fixed).tocsr()
    return SparseMatrix(csr, symmetric=matrix.symmetric)


# -- load vectors ------------------------------------------------------------


def assemble_load(space, f, quad_degree=None):
    """Entries int f . phi_i dx by quadrature; f maps (x, y) arrays to values."""
    q = quad_degree or default_quadrature(space)
    phi, _, X, W = space.tabulate(triangle_rule(q))
    vals = np.asarray(f(X[..., 0], X[..., 1]), dtype=float)
    out = np.zeros(space.dim)
    if space.components == 1:
        e = np.einsum("cq,qn->cn", W * vals, phi)
        np.add.at(out, space.cell_dofs, e)
        return out
    n = space.n_scalar
    for c in range(2):
        e = np.einsum("cq,qn->cn", W * vals[..., c], phi)
        np.add.at(out, space.cell_dofs + c * n, e)
    return out


def assemble_gradient_load(space, g, quad_degree=None):
    """Entries int g . grad(phi_i) dx on a scalar space; g maps to (..., 2)."""
    if space.components != 1:
        raise InvalidArgumentError("gradient load expects a scalar space")
    q = quad_degree or default_quadrature(space)
    _, grad, X, W = space.tabulate(triangle_rule(q))
    gv = np.asarray(g(X[..., 0], X[..., 1]), dtype=float)
    e = np.einsum("cq,cqi,cqni->cn", W, gv, grad)
    out = np.zeros(space.dim)
    np.add.at(out, space.cell_dofs, e)
    return out


def mass_form_applied(space, bathymetry, model, field, quad_degree=None):
    """C_s(f, psi_i) for an analytic scalar field with .gradient."""
    q = quad_degree or default_quadrature(space)
    out = assemble_load(space, field, q)
    kappa = model.es_coefficient
    if kappa:

        def weighted_grad(x, y):
            D = bathymetry(x, y)
            return kappa * D[..., None] ** 2 * np.asarray(field.gradient(x, y))

        out += assemble_gradient_load(space, weighted_grad, q)
    return out


def momentum_form_applied(uspace, bathymetry, model, field, nitsche_constant=50.0, quad_degree=None):
    """C(f, phi_i) for an analytic vector field with .jacobian.

    This applies the full discrete momentum form (volume + Nitsche boundary
    terms) to an exact field, which is how manufactured forcing is built.
    """
    q = quad_degree or default_quadrature(uspace)
    rule = triangle_rule(q)
    phi, grad, X, W = uspace.tabulate(rule)
    D = bathymetry(X[..., 0], X[..., 1])
    gD = bathymetry.gradient(X[..., 0], X[..., 1])
    u = np.asarray(field(X[..., 0], X[..., 1]), dtype=float)
    ju = np.asarray(field.jacobian(X[..., 0], X[..., 1]), dtype=float)
    divu = ju[..., 0, 0] + ju[..., 1, 1]
    out = np.zeros(uspace.dim)
    n = uspace.n_scalar
    nc, nq = W.shape

    if model.uses_laplacian:
        c = model.laplacian_coefficient
        adv = 2.0 * D[..., None] * np.einsum("cqi,cqji->cqj", gD, ju)
        for comp in range(2):
            e = np.einsum("cq,qn->cn", W * u[..., comp], phi)
            e += c * np.einsum("cq,cqi,cqni->cn", W * D**2, ju[..., comp, :], grad)
            e += c * np.einsum("cq,qn->cn", W * adv[..., comp], phi)
            np.add.at(out, uspace.cell_dofs + comp * n, e)
        cd = constrained_dofs(uspace, model)
        out[cd] = 0.0
        return out

    b1, b2 = model.beta1, model.beta2
    ca = -(b1 + b2)
    divD_u = D * divu + np.einsum("cqi,cqi->cq", u, gD)
    p_u = np.einsum("cqi,cqi->cq", u, gD)
    phi2 = np.broadcast_to(phi[None, :, :], (nc,) + phi.shape)
    divD, p = _vector_basis_arrays(phi2, grad, D, gD)
    e = ca * np.einsum("cq,cqn->cn", W * divD_u, divD)
    if not bathymetry.is_flat:
        e += b2 * (
            np.einsum("cq,cqn->cn", W * p_u, p)
            + np.einsum("cq,cqn->cn", W * p_u, divD)
            - np.einsum("cq,cqn->cn", W * divD_u, p)
        )
    mass = np.concatenate(
        [np.einsum("cq,qn->cn", W * u[..., 0], phi), np.einsum("cq,qn->cn", W * u[..., 1], phi)],
        axis=1,
    )
    e += mass
    vdofs = np.concatenate([uspace.cell_dofs, uspace.cell_dofs + n], axis=1)
    np.add.at(out, vdofs, e)

    fd = facet_data(uspace, q)
    Df = bathymetry(fd.points[..., 0], fd.points[..., 1])
    gDf = bathymetry.gradient(fd.points[..., 0], fd.points[..., 1])
    uf = np.asarray(field(fd.points[..., 0], fd.points[..., 1]), dtype=float)
    juf = np.asarray(field.jacobian(fd.points[..., 0], fd.points[..., 1]), dtype=float)
    divuf = juf[..., 0, 0] + juf[..., 1, 1]
    divD_uf = Df * divuf + np.einsum("bki,bki->bk", uf, gDf)
    p_uf = np.einsum("bki,bki->bk", uf, gDf)
    un = np.einsum("bki,bi->bk", uf, fd.normals)
    Dn_u = Df * un
    divDf, pf = _vector_basis_arrays(fd.phi, fd.grad, Df, gDf)
    Dn = np.concatenate(
        [
            Df[..., None] * fd.phi * fd.normals[:, None, 0:1],
            Df[..., None] * fd.phi * fd.normals[:, None, 1:2],
        ],
        axis=-1,
    )
    ef = (b1 + b2) * (
        np.einsum("bk,bkn->bn", fd.weights * divD_uf, Dn)
        + np.einsum("bk,bkn->bn", fd.weights * Dn_u, divDf)
    )
    if not bathymetry.is_flat:
        ef -= b2 * (
            np.einsum("bk,bkn->bn", fd.weights * p_uf, Dn)
            + np.einsum("bk,bkn->bn", fd.weights * Dn_u, pf)
        )
    pen = ca * nitsche_constant / fd.lengths
    ef += np.einsum("bk,bkn->bn", (pen[:, None] * fd.weights) * Dn_u, Dn)
    fvdofs = np.concatenate([fd.dofs, fd.dofs + n], axis=1)
    np.add.at(out, fvdofs, ef)
    return out


# -- field sampling, projection, norms ----------------------------------------


def scalar_values(space, coeffs, rule):
    """FE values and gradients at volume quadrature points: (nc, q), (nc, q, 2)."""
    phi, grad, _, _ = space.tabulate(rule)
    cd = coeffs[space.cell_dofs]
    vals = np.einsum("qn,cn->cq", phi, cd)
    grads = np.einsum("cqni,cn->cqi", grad, cd)
    return vals, grads


def vector_values(space, coeffs, rule):
    """FE values and Jacobians at quadrature points: (nc, q, 2), (nc, q, 2, 2)."""
    phi, grad, _, _ = space.tabulate(rule)
    n = space.n_scalar
    nc = space.mesh.n_triangles
    nq = phi.shape[0]
    vals = np.empty((nc, nq, 2))
    jac = np.empty((nc, nq, 2, 2))
    for c in range(2):
        cd = coeffs[c * n : (c + 1) * n][space.cell_dofs]
        vals[..., c] = np.einsum("qn,cn->cq", phi, cd)
        jac[..., c, :] = np.einsum("cqni,cn->cqi", grad, cd)
    return vals, jac


def l2_project(space, f, quad_degree=None):
    """L2 projection onto the space via a (preconditioned CG) mass solve."""
    M = assemble_mass_matrix(space, quad_degree)
    b = assemble_load(space, f, quad_degree)
    x, report = cg_solve(M, b, tol=1e-13)
    if not report.converged:
        # fall back to the report's residual; mass matrices are well conditioned
        x, report = cg_solve(M, b, tol=1e-10)
    return x


def integrate_field(space, coeffs, quad_degree=None):
    """Exact quadrature of a scalar FE function over the domain."""
    q = quad_degree or default_quadrature(space)
    rule = triangle_rule(q)
    vals, _ = scalar_values(space, coeffs, rule)
    _, _, _, W = space.tabulate(rule)
    return float(np.sum(W * vals))


@dataclass(frozen=True)
class ErrorNorms:
    l2: float
    h1: float
    hdiv: Optional[float] = None

    def __iter__(self):
        return iter((self.l2, self.h1, self.hdiv))


def error_norms(space, coeffs, exact, quad_degree=None):
    """L2 / H1 (and H(div) for vector fields) errors against an exact field.

    `exact` is a callable; for H1 it must expose .gradient (scalar) or
    .jacobian (vector), and .divergence for the vector H(div) norm.
    """
    q = quad_degree or default_quadrature(space)
    rule = triangle_rule(q)
    _, _, X, W = space.tabulate(rule)
    x, y = X[..., 0], X[..., 1]
    if space.components == 1:
        vals, grads = scalar_values(space, coeffs, rule)
        dv = vals - np.asarray(exact(x, y), dtype=float)
        l2sq = np.sum(W * dv**2)
        dg = grads - np.asarray(exact.gradient(x, y), dtype=float)
        h1sq = l2sq + np.sum(W * np.einsum("cqi->cq", dg**2))
        return ErrorNorms(float(np.sqrt(l2sq)), float(np.sqrt(h1sq)))
    vals, jac = vector_values(space, coeffs, rule)
    dv = vals - np.asarray(exact(x, y), dtype=float)
    l2sq = np.sum(W * np.einsum("cqi->cq", dv**2))
    dj = jac - np.asarray(exact.jacobian(x, y), dtype=float)
    h1sq = l2sq + np.sum(W * np.einsum("cqij->cq", dj**2))
    ddiv = (jac[..., 0, 0] + jac[..., 1, 1]) - np.asarray(exact.divergence(x, y), dtype=float)
    hdsq = l2sq + np.sum(W * ddiv**2)
    return ErrorNorms(float(np.sqrt(l2sq)), float(np.sqrt(h1sq)), float(np.sqrt(hdsq)))
