"""Sparse CSR storage and Jacobi-preconditioned iterative solvers.

Storage wraps scipy CSR (FEM accumulation semantics on construction); the CG
and BiCGStab loops are implemented directly on raw matvecs so small systems
are not dominated by wrapper overhead.  Both accept a warm-start iterate and
are deterministic (fixed reduction order).  CG is used for symmetric positive
definite operators, BiCGStab otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError, PreconditionerError, SolverBreakdownError

__all__ = ["SparseMatrix", "SolverReport", "from_triplets", "cg_solve", "bicgstab_solve", "solve"]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    final_residual: float
    converged: bool
    method: str = ""


class SparseMatrix:
    """Square CSR matrix; immutable after assembly.

    `symmetric` is a caller-set promise used to pick CG over BiCGStab.
    """

    def __init__(self, csr, symmetric=False):
        csr = csr.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        if csr.shape[0] != csr.shape[1] or csr.shape[0] < 1:
            raise InvalidArgumentError("matrix must be square with n >= 1")
        self._csr = csr
        self.symmetric = bool(symmetric)
        self._jacobi_inv = None

    @property
    def shape(self):
        return self._csr.shape

    @property
    def n(self):
        return self._csr.shape[0]

    @property
    def row_offsets(self):
        return self._csr.indptr

    @property
    def column_indices(self):
        return self._csr.indices

    @property
    def values(self):
        return self._csr.data

    @property
    def nnz(self):
        return self._csr.nnz

    def matvec(self, x):
        return self._csr @ np.asarray(x, dtype=float)

    def diagonal(self):
        return self._csr.diagonal()

    def jacobi_inverse(self):
        """Cached reciprocal diagonal (the reusable preconditioner)."""
        if self._jacobi_inv is None:
            d = self.diagonal()
            if np.any(d == 0.0):
                raise PreconditionerError("zero diagonal entry; Jacobi preconditioner undefined")
            self._jacobi_inv = 1.0 / d
        return self._jacobi_inv

    def scaled_system(self):
        """Cached symmetric Jacobi scaling (S A S, s) with s = 1/sqrt(|diag|)."""
        if getattr(self, "_scaled", None) is None:
            self.jacobi_inverse()  # zero-diagonal guard
            s = 1.0 / np.sqrt(np.abs(self.diagonal()))
            S = sp.diags(s)
            self._scaled = ((S @ self._csr @ S).tocsr(), s)
        return self._scaled

    def toarray(self):
        return self._csr.toarray()

    def scipy(self):
        return self._csr

    def __matmul__(self, x):
        return self.matvec(x)


def from_triplets(n, entries, symmetric=False):
    """Assemble an n x n SparseMatrix from (row, col, value) triplets.

    Duplicate positions are summed (FEM accumulation).  `entries` may be a
    sequence of triples or a (rows, cols, values) tuple of arrays.
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if isinstance(entries, tuple) and len(entries) == 3:
        rows, cols, vals = entries
    else:
        entries = list(entries)
        if entries:
            rows, cols, vals = zip(*entries)
        else:
            rows, cols, vals = (), (), ()
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
        raise InvalidArgumentError("triplet index out of range")
    csr = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return SparseMatrix(csr, symmetric=symmetric)


def _prepare(A, b, tol, maxit):
    b = np.asarray(b, dtype=float)
    if b.shape != (A.n,):
        raise InvalidArgumentError("right-hand side length does not match the matrix")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    return b, (10 * A.n if maxit is None else maxit), float(np.linalg.norm(b))


def cg_solve(A, b, tol=DEFAULT_TOL, maxit=None, x0=None):
    """Preconditioned conjugate gradients for SPD systems (caller's contract).

    Returns (x, SolverReport); non-convergence within maxit is reported in the
    SolverReport, not raised.
    """
    b, maxit, bnorm = _prepare(A, b, tol, maxit)
    minv = A.jacobi_inverse()
    if bnorm == 0.0:
        return np.zeros_like(b), SolverReport(0, 0.0, True, "cg")
    csr = A.scipy()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    target = tol * bnorm
    it = 0
    rel = np.inf
    # Outer restarts guard against recurrence-residual drift near round-off.
    for _ in range(4):
        r = b - csr @ x
        if np.linalg.norm(r) <= target:
            break
        z = minv * r
        p = z.copy()
        rz = float(r @ z)
        while it < maxit and np.linalg.norm(r) > target:
            Ap = csr @ p
            pAp = float(p @ Ap)
            if pAp == 0.0:
                raise SolverBreakdownError("cg breakdown: p.Ap = 0")
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            it += 1
            z = minv * r
            rz_new = float(r @ z)
            if rz == 0.0:
                break
            p = z + (rz_new / rz) * p
            rz = rz_new
        if it >= maxit:
            break
    rel = float(np.linalg.norm(b - csr @ x) / bnorm)
    return x, SolverReport(it, rel, rel <= tol, "cg")


def bicgstab_solve(A, b, tol=DEFAULT_TOL, maxit=None, x0=None):
    """Jacobi-preconditioned BiCGStab (symmetric split scaling S A S).

    The split form keeps the operator nearly symmetric, which avoids the
    stagnation one-sided preconditioning shows on the Nitsche-penalized
    systems.  Convergence is judged on the true unscaled residual; the scaled
    target tightens until it passes.  Deterministic restarts handle
    rho-breakdowns.
    """
    b_orig, maxit, bnorm_orig = _prepare(A, b, tol, maxit)
    if bnorm_orig == 0.0:
        return np.zeros_like(b_orig), SolverReport(0, 0.0, True, "bicgstab")
    csr, scale = A.scaled_system()
    b = scale * b_orig
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float) / scale
    target = 0.5 * tol * float(np.linalg.norm(b))
    it = 0
    rel = np.inf
    for _attempt in range(6):
        x, it = _bicgstab_kernel(csr, b, x, target, maxit, it)
        rel = float(np.linalg.norm(b_orig - A.matvec(scale * x)) / bnorm_orig)
        if rel <= tol or it >= maxit:
            break
        target *= 0.25
    return scale * x, SolverReport(it, rel, rel <= tol, "bicgstab")


def _bicgstab_kernel(csr, b, x, target, maxit, it):
    """Plain BiCGStab iterations on a pre-scaled system, restart-safe."""
    x = x.copy()
    r = b - csr @ x
    restart = True
    restarts_left = 8
    rho = alpha = omega = 1.0
    rhat = v = p = None
    first = True
    while it < maxit and np.linalg.norm(r) > target:
        if restart:
            rhat = r.copy()
            rho = alpha = omega = 1.0
            v = np.zeros_like(b)
            p = np.zeros_like(b)
            first = True
            restart = False
        rho_new = float(rhat @ r)
        if rho_new == 0.0 or (not first and omega == 0.0):
            if restarts_left == 0:
                raise SolverBreakdownError("bicgstab breakdown: rhat.r = 0")
            restarts_left -= 1
            restart = True
            continue
        if first:
            p = r.copy()
            first = False
        else:
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)
        rho = rho_new
        v = csr @ p
        denom = float(rhat @ v)
        if denom == 0.0:
            if restarts_left == 0:
                raise SolverBreakdownError("bicgstab breakdown: rhat.Ap = 0")
            restarts_left -= 1
            restart = True
            continue
        alpha = rho / denom
        s = r - alpha * v
        x += alpha * p
        it += 1
        if np.linalg.norm(s) <= target:
            r = s
            break
        t = csr @ s
        tt = float(t @ t)
        if tt == 0.0:
            r = s
            if restarts_left == 0:
                raise SolverBreakdownError("bicgstab breakdown: t.t = 0")
            restarts_left -= 1
            restart = True
            continue
        omega = float(t @ s) / tt
        x += omega * s
        r = s - omega * t
    return x, it


def solve(A, b, tol=DEFAULT_TOL, maxit=None, x0=None):
    """Dispatch on the matrix's symmetry promise."""
    if A.symmetric:
        return cg_solve(A, b, tol, maxit, x0)
    return bicgstab_solve(A, b, tol, maxit, x0)
