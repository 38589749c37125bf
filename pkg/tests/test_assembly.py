import numpy as np
import pytest

from longwave.errors import InvalidArgumentError
from longwave.fem import (
    FunctionSpace,
    assemble_load,
    assemble_mass_matrix,
    assemble_mass_operator,
    assemble_momentum_operator,
    error_norms,
    flat_bathymetry,
    interpolate,
    linear_bathymetry,
    momentum_form_applied,
)
from longwave.mesh import build_rectangle_mesh
from longwave.models import make_model
from longwave.verify import EllipticVelocity, elliptic_forcing

UNIT = (0.0, 1.0, 0.0, 1.0)


@pytest.fixture(scope="module")
def mesh22():
    return build_rectangle_mesh(UNIT, 2, 2)


@pytest.fixture(scope="module")
def classical():
    return make_model("classical", gravity=1.0)


@pytest.fixture(scope="module")
def bbm():
    return make_model("bbm", gravity=1.0)


def test_mass_matrix_spd_and_row_sums(mesh22):
    for r in (1, 2, 3):
        V = FunctionSpace(mesh22, r)
        M = assemble_mass_matrix(V)
        dense = M.toarray()
        assert np.allclose(dense, dense.T, atol=1e-14)
        w = np.linalg.eigvalsh(dense)
        assert w.min() > 0
        assert dense.sum() == pytest.approx(1.0, abs=1e-12)  # domain area


def test_identity_mass_operator_equals_mass(mesh22, classical):
    V = FunctionSpace(mesh22, 2)
    bathy = flat_bathymetry(1.0)
    A = assemble_mass_operator(V, bathy, classical)
    M = assemble_mass_matrix(V)
    assert np.allclose(A.toarray(), M.toarray(), atol=1e-15)


def test_bbm_mass_operator_constant_field(mesh22, bbm):
    # gradient term vanishes on constants: operator @ 1 == mass @ 1
    V = FunctionSpace(mesh22, 1)
    bathy = flat_bathymetry(1.0)
    A = assemble_mass_operator(V, bathy, bbm)
    M = assemble_mass_matrix(V)
    ones = np.ones(V.n_scalar)
    assert np.allclose(A.matvec(ones), M.matvec(ones), atol=1e-14)


def test_bbm_mass_operator_spd(mesh22, bbm):
    # dense eigenvalue oracle on the 2x2-cell mesh
    V = FunctionSpace(mesh22, 1)
    A = assemble_mass_operator(V, linear_bathymetry(-0.05, -0.05, 1.5), bbm)
    dense = A.toarray()
    assert np.allclose(dense, dense.T, atol=1e-14)
    assert np.linalg.eigvalsh(dense).min() > 0


def test_momentum_operator_flat_symmetric(classical):
    mesh = build_rectangle_mesh(UNIT, 3, 3)
    U = FunctionSpace(mesh, 2, components=2)
    A = assemble_momentum_operator(U, flat_bathymetry(1.0), classical, 50.0)
    dense = A.toarray()
    scale = np.abs(dense).max()
    assert np.abs(dense - dense.T).max() <= 1e-12 * scale
    assert A.symmetric


def test_momentum_operator_rejects_bad_penalty(mesh22, classical):
    U = FunctionSpace(mesh22, 1, components=2)
    with pytest.raises(InvalidArgumentError):
        assemble_momentum_operator(U, flat_bathymetry(1.0), classical, 0.0)


def test_momentum_operator_zero_field(mesh22, classical):
    U = FunctionSpace(mesh22, 2, components=2)
    A = assemble_momentum_operator(U, flat_bathymetry(1.0), classical, 50.0)
    assert np.allclose(A.matvec(np.zeros(U.dim)), 0.0)


def test_load_zero_and_area(mesh22):
    V = FunctionSpace(mesh22, 1)
    z = assemble_load(V, lambda x, y: np.zeros_like(x))
    assert np.all(z == 0.0)
    b = assemble_load(V, lambda x, y: np.ones_like(x))
    assert b.sum() == pytest.approx(1.0, abs=1e-14)


def test_load_polynomial_matches_exact_integral():
    # One reference triangle; oracle: int x^2 y = 2! 1! / 5! = 1/60 over it,
    # and the P1 hat at vertex 0 gives int (1-x-y) x^2 y analytically.
    from longwave.mesh import make_triangulation

    mesh = make_triangulation([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    V = FunctionSpace(mesh, 1)
    b = assemble_load(V, lambda x, y: x**2 * y, quad_degree=6)
    # int x^2 y over T = 1/60; the three P1 entries must sum to it
    assert b.sum() == pytest.approx(1.0 / 60.0, rel=1e-13)
    # entry at vertex (1,0): int x^3 y = 3!1!/6! = 1/120
    assert b[1] == pytest.approx(1.0 / 120.0, rel=1e-13)


def test_error_norms_interpolated_polynomial(mesh22):
    V = FunctionSpace(mesh22, 2)

    class Exact:
        def __call__(self, x, y):
            return x**2 + 2 * x * y

        def gradient(self, x, y):
            g = np.empty(np.shape(x) + (2,))
            g[..., 0] = 2 * x + 2 * y
            g[..., 1] = 2 * x
            return g

    coeffs = interpolate(V, Exact())
    e = error_norms(V, coeffs, Exact())
    assert e.l2 <= 1e-12 and e.h1 <= 1e-11


def test_error_norms_zero_coeffs_unit_exact(mesh22):
    V = FunctionSpace(mesh22, 1)

    class One:
        def __call__(self, x, y):
            return np.ones_like(x)

        def gradient(self, x, y):
            return np.zeros(np.shape(x) + (2,))

    e = error_norms(V, np.zeros(V.n_scalar), One())
    assert e.l2 == pytest.approx(1.0, abs=1e-12)


def test_nitsche_consistency_under_quadrature_refinement():
    # Inserting the exact solution into the discrete form reproduces the load
    # vector; the residual is pure quadrature error and drops with exactness.
    mesh = build_rectangle_mesh(UNIT, 6, 6)
    model = make_model("classical", gravity=1.0)
    exact = EllipticVelocity()
    for bathy in (flat_bathymetry(1.0), linear_bathymetry(-0.05, -0.05, 1.5)):
        f = elliptic_forcing(exact, bathy, model)
        res = []
        for r in (1, 2):
            U = FunctionSpace(mesh, r, components=2)
            for q in (2 * r + 2, 2 * r + 6, 2 * r + 10):
                lhs = momentum_form_applied(U, bathy, model, exact, 50.0, quad_degree=q)
                rhs = assemble_load(U, f, quad_degree=q)
                res.append(np.linalg.norm(lhs - rhs))
        res = np.asarray(res).reshape(2, 3)
        assert np.all(res[:, 1] < res[:, 0])
        assert np.all(res[:, 2] <= res[:, 1] * 1.5)
        assert res[:, 2].max() < 1e-10


@pytest.mark.parametrize("kind", ["classical", "modified", "bbm", "simplified"])
def test_applied_form_matches_matrix_on_fe_functions(kind):
    # For an FE function the applied-form functional must equal matrix @ coeffs.
    mesh = build_rectangle_mesh(UNIT, 3, 3)
    U = FunctionSpace(mesh, 2, components=2)
    bathy = linear_bathymetry(-0.05, -0.05, 1.5)
    model = make_model(kind, gravity=1.0)
    A = assemble_momentum_operator(U, bathy, model, 50.0)
    rng = np.random.default_rng(5)
    coeffs = rng.standard_normal(U.dim)
    from longwave.fem import constrained_dofs

    cd = constrained_dofs(U, model)
    if cd is not None:
        coeffs[cd] = 0.0

    class Field:
        def __call__(self, x, y):
            pts = np.stack([np.ravel(x), np.ravel(y)], axis=1)
            cells = U.locate(pts)
            return U.eval_cells(coeffs, cells, pts).reshape(np.shape(x) + (2,))

        def jacobian(self, x, y):
            # FE jacobian via the cell-local basis gradients
            pts = np.stack([np.ravel(x), np.ravel(y)], axis=1)
            cells = U.locate(pts)
            ref = U.reference_coords(cells, pts)
            grads = np.einsum("pki,pnk->pni", U.inv_j[cells], U.element.grad(ref))
            J = np.empty((len(pts), 2, 2))
            for c in range(2):
                block = U.component(coeffs, c)
                J[:, c, :] = np.einsum("pni,pn->pi", grads, block[U.cell_dofs[cells]])
            return J.reshape(np.shape(x) + (2, 2))

    # quadrature degree high enough that FE products are integrated exactly
    lhs = momentum_form_applied(U, bathy, model, Field(), 50.0, quad_degree=8)
    rhs = A.matvec(coeffs)
    if cd is not None:
        lhs[cd] = 0.0
        rhs[cd] = 0.0
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(rhs).max()))
