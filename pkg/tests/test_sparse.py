import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from longwave.errors import InvalidArgumentError, PreconditionerError
from longwave.sparse import bicgstab_solve, cg_solve, from_triplets


def test_duplicate_triplets_accumulate():
    A = from_triplets(2, [(0, 0, 1.0), (0, 0, 1.0), (1, 1, 3.0)])
    assert A.toarray()[0, 0] == 2.0
    assert A.toarray()[1, 1] == 3.0


def test_identity_matvec():
    A = from_triplets(3, [(i, i, 1.0) for i in range(3)])
    x = np.array([1.0, -2.0, 4.0])
    assert np.array_equal(A.matvec(x), x)


def test_out_of_range_rejected():
    with pytest.raises(InvalidArgumentError):
        from_triplets(3, [(3, 0, 1.0)])


def test_cg_identity_one_iteration():
    A = from_triplets(4, [(i, i, 1.0) for i in range(4)], symmetric=True)
    b = np.array([1.0, 2.0, 3.0, 4.0])
    x, rep = cg_solve(A, b)
    assert np.allclose(x, b, atol=1e-14)
    assert rep.converged and rep.iterations <= 1


def test_cg_diagonal():
    A = from_triplets(3, [(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)], symmetric=True)
    x, rep = cg_solve(A, np.array([1.0, 2.0, 3.0]))
    assert np.allclose(x, np.ones(3), atol=1e-12)
    assert rep.converged


def _laplacian_5pt(n):
    entries = []
    def idx(i, j):
        return i * n + j
    for i in range(n):
        for j in range(n):
            entries.append((idx(i, j), idx(i, j), 4.0))
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if 0 <= i + di < n and 0 <= j + dj < n:
                    entries.append((idx(i, j), idx(i + di, j + dj), -1.0))
    return from_triplets(n * n, entries, symmetric=True)


def test_cg_matches_dense_factorization():
    # Oracle: dense Gaussian elimination on the 5-point Laplacian.
    A = _laplacian_5pt(10)
    rng = np.random.default_rng(7)
    b = rng.standard_normal(100)
    expected = np.linalg.solve(A.toarray(), b)
    x, rep = cg_solve(A, b, tol=1e-12)
    assert rep.converged
    assert np.linalg.norm(x - expected) / np.linalg.norm(expected) < 1e-8


def test_bicgstab_identity():
    A = from_triplets(3, [(i, i, 1.0) for i in range(3)])
    b = np.array([2.0, -1.0, 0.5])
    x, rep = bicgstab_solve(A, b)
    assert np.allclose(x, b, atol=1e-12)


def test_bicgstab_upper_triangular_matches_backsubstitution():
    entries = [(0, 0, 2.0), (0, 1, 1.0), (0, 2, -1.0), (1, 1, 3.0), (1, 2, 0.5), (2, 2, 1.5)]
    A = from_triplets(3, entries)
    b = np.array([1.0, 2.0, 3.0])
    # back-substitution oracle
    x3 = b[2] / 1.5
    x2 = (b[1] - 0.5 * x3) / 3.0
    x1 = (b[0] - 1.0 * x2 + 1.0 * x3) / 2.0
    x, rep = bicgstab_solve(A, b, tol=1e-13)
    assert rep.converged
    assert np.allclose(x, [x1, x2, x3], atol=1e-9)


def test_nonconvergence_reported_not_raised():
    A = _laplacian_5pt(10)
    b = np.ones(100)
    x, rep = cg_solve(A, b, tol=1e-14, maxit=2)
    assert not rep.converged


def test_zero_diagonal_raises():
    A = from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)])
    with pytest.raises(PreconditionerError):
        bicgstab_solve(A, np.ones(2))


def test_converged_respects_tolerance_contract():
    A = _laplacian_5pt(6)
    b = np.ones(36)
    x, rep = cg_solve(A, b, tol=1e-10)
    assert rep.converged
    assert rep.final_residual <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8), st.floats(-3, 3), st.floats(-3, 3))
def test_matvec_linearity(vals, a, b):
    A = _laplacian_5pt(4)  # 16x16, use first 16 entries of x built from vals
    x = np.resize(np.asarray(vals), 16)
    y = np.linspace(-1, 1, 16)
    lhs = A.matvec(a * x + b * y)
    rhs = a * A.matvec(x) + b * A.matvec(y)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_deterministic_solves():
    A = _laplacian_5pt(8)
    b = np.sin(np.arange(64.0))
    x1, _ = cg_solve(A, b)
    x2, _ = cg_solve(A, b)
    assert np.array_equal(x1, x2)
