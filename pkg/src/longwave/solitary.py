"""Line solitary waves by the Petviashvili iteration in the FEM spaces.

In the traveling frame xi = alpha.x - c_s t - x0 the flat-bottom systems
reduce to fixed-point problems L w = N(w):

  Peregrine family: L = c_s - cA c_s D0^2 d_xi^2 on w = alpha.u (cA = 1/3),
      N(w) = w^2/2 + g D0 w / (c_s - w), and eta = D0 w / (c_s - w);
  BBM family: a coupled system in (eta, w) with the mass regularization
      (a~+b~) c_s D0^2 Laplacian on eta and N = (eta w, w^2/2).

Each iteration solves the (constant) L-system against M_n^gamma N(w_n) with
the stabilizing multiplier M_n = L(w_n, w_n) / (N(w_n), w_n); the stopping
rule is the normalized residual R_n = |L(w,w) - (N(w),w)| / ||w||_2 < delta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    InvalidArgumentError,
    NonConvergenceError,
    SingularNonlinearityError,
)
from .fem import (
    FieldState,
    assemble_directional_stiffness,
    assemble_mass_matrix,
    assemble_weighted_stiffness,
    l2_project,
)
from .fem.quadrature import triangle_rule
from .fem.assembly import default_quadrature, scalar_values
from .fem.spaces import scalar_twin
from .models import make_model
from .sparse import SparseMatrix, bicgstab_solve, cg_solve, from_triplets

__all__ = [
    "SolitaryWaveProblem",
    "PetviashviliState",
    "speed_from_amplitude_peregrine",
    "initial_guess",
    "petviashvili_peregrine",
    "petviashvili_bbm",
    "petviashvili_bbm_continuation",
    "recover_fields",
    "PeregrineWaveOperator",
    "BbmWaveOperator",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolitaryWaveProblem:
    """Target amplitude, flat depth and traveling-wave parameters.

    `speed` defaults per system: the exact speed-amplitude relation for the
    Peregrine family, sqrt(g (D0 + A)) for BBM.
    """

    amplitude: float
    depth: float = 1.0
    gravity: float = 1.0
    speed: Optional[float] = None
    direction: tuple = (1.0, 0.0)
    offset: float = 0.0
    gamma: float = 2.0
    tolerance: float = 1e-5
    tail_tol: float = 1e-7

    def __post_init__(self):
        if self.amplitude <= 0 or self.depth <= 0 or self.gravity <= 0:
            raise InvalidArgumentError("amplitude, depth and gravity must be positive")
        if not (1.0 <= self.gamma <= 3.0):
            raise InvalidArgumentError("gamma must lie in [1, 3]")
        if self.tolerance <= 0:
            raise InvalidArgumentError("tolerance must be positive")
        d = np.asarray(self.direction, dtype=float)
        if not math.isclose(float(np.hypot(*d)), 1.0, rel_tol=0, abs_tol=1e-12):
            raise InvalidArgumentError("direction must be a unit vector")
        if self.speed is not None and self.speed <= math.sqrt(self.gravity * self.depth):
            raise InvalidArgumentError("speed must exceed sqrt(g D0)")

    @property
    def decay_rate(self):
        """lambda = sqrt(3 A / (4 D0^3)) of the sech^2 initial guess."""
        return math.sqrt(3.0 * self.amplitude / (4.0 * self.depth**3))

    @property
    def guess_speed(self):
        return math.sqrt(self.gravity * (self.depth + self.amplitude))

    def xi(self, x, y):
        """Traveling-frame coordinate at t = 0."""
        ax, ay = self.direction
        return ax * np.asarray(x, dtype=float) + ay * np.asarray(y, dtype=float) - self.offset


@dataclass
class PetviashviliState:
    """Iterate of the Petviashvili method (w in the vector space layout)."""

    w: np.ndarray
    eta: Optional[np.ndarray]
    multiplier: float
    residual: float
    iterations: int
    system: str
    speed: float


def speed_from_amplitude_peregrine(amplitude, depth, gravity):
    """Exact speed of the Peregrine solitary wave of a given amplitude."""
    if amplitude <= 0:
        raise InvalidArgumentError("amplitude must be positive (limit is sqrt(g D0))")
    A, D0, g = float(amplitude), float(depth), float(gravity)
    return (
        math.sqrt(6.0)
        * (D0 + A)
        / math.sqrt(3.0 * D0 + 2.0 * A)
        * math.sqrt(g * D0 * (D0 + A) * math.log((D0 + A) / D0) - g * D0 * A)
        / A
    )


def _check_tail(problem, space):
    xi = problem.xi(space.mesh.vertices[:, 0], space.mesh.vertices[:, 1])
    edge = max(abs(float(xi.min())), abs(float(xi.max())))
    tail = 1.0 / math.cosh(problem.decay_rate * edge) ** 2
    if tail > problem.tail_tol:
        logger.warning(
            "channel may be too short: sech^2 tail %.3e exceeds %.1e at the ends",
            tail,
            problem.tail_tol,
        )


def _guess_profiles(problem, speed):
    lam = problem.decay_rate
    A, D0 = problem.amplitude, problem.depth

    def eta0(x, y):
        return A / np.cosh(lam * problem.xi(x, y)) ** 2

    def w0(x, y):
        e = eta0(x, y)
        return speed * e / (D0 + e)

    return eta0, w0


def initial_guess(problem, uspace, etaspace=None, speed=None):
    """L2-projected sech^2 guess; the transverse component starts at zero."""
    speed = speed or problem.speed or problem.guess_speed
    _check_tail(problem, uspace)
    eta0, w0 = _guess_profiles(problem, speed)

    def wvec(x, y):
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0] = w0(x, y)
        return out

    w = l2_project(uspace, wvec)
    eta = l2_project(etaspace, eta0) if etaspace is not None else None
    return PetviashviliState(
        w=w, eta=eta, multiplier=math.nan, residual=math.inf, iterations=0,
        system="bbm" if etaspace is not None else "peregrine", speed=speed,
    )


class PeregrineWaveOperator:
    """L_h and N for the scalar Peregrine-family traveling-wave problem.

    The stiffness term is assembled with the full gradient rather than the
    xi-direction alone: the transverse part vanishes identically on the line
    waves being sought (constant along alpha-perp), but it turns them from
    weakly unstable into attracting fixed points of the 2D iteration map
    (without it, iterating past residuals ~1e-6 drifts to transversely
    modulated attractors).
    """

    def __init__(self, problem, uspace, model=None, quad_degree=None):
        self.problem = problem
        self.uspace = uspace
        self.model = model or make_model("classical", gravity=problem.gravity)
        self.speed = problem.speed or speed_from_amplitude_peregrine(
            problem.amplitude, problem.depth, problem.gravity
        )
        self.qd = quad_degree or default_quadrature(uspace)
        ca = self.model.graddiv_coefficient
        cs, D0 = self.speed, problem.depth
        scalar = scalar_twin(uspace)
        M = assemble_mass_matrix(scalar, self.qd)
        S = assemble_weighted_stiffness(scalar, 1.0, self.qd)
        L11 = cs * M.scipy() + ca * cs * D0**2 * S.scipy()
        self.matrix = _block_diag(L11, M.scipy(), symmetric=True)
        self._scalar = scalar
        self._mass = M

    def nonlinearity_load(self, w):
        """(N(w), chi) with N = w^2/2 + g D0 w / (c_s - w) on the first block."""
        rule = triangle_rule(self.qd)
        n = self.uspace.n_scalar
        vals, _ = scalar_values(self._scalar, w[:n], rule)
        gap = self.speed - vals
        if np.min(gap) <= 0.0:
            raise SingularNonlinearityError("c_s - w reached zero; wave too steep")
        g, D0 = self.problem.gravity, self.problem.depth
        nl = 0.5 * vals**2 + g * D0 * vals / gap
        phi, _, _, W = self._scalar.tabulate(rule)
        out = np.zeros(2 * n)
        np.add.at(out, self._scalar.cell_dofs, np.einsum("cq,qn->cn", W * nl, phi))
        return out

    def solve(self, rhs, x0=None):
        x, report = cg_solve(self.matrix, rhs, tol=1e-12, x0=x0)
        return x, report

    def diagnostics(self, w):
        load = self.nonlinearity_load(w)
        quad = float(w @ self.matrix.matvec(w))
        pair = float(load @ w)
        residual = abs(quad - pair) / float(np.linalg.norm(w))
        return load, quad, pair, residual


class BbmWaveOperator:
    """Coupled (eta, w, w~) operator of the BBM-family traveling-wave problem."""

    def __init__(self, problem, etaspace, uspace, model=None, quad_degree=None):
        if etaspace.mesh is not uspace.mesh:
            raise InvalidArgumentError("eta and u spaces must share one mesh")
        self.problem = problem
        self.etaspace = etaspace
        self.uspace = uspace
        self.model = model or make_model("bbm", gravity=problem.gravity)
        if self.model.es_coefficient <= 0:
            raise InvalidArgumentError("BBM traveling waves need a regularized mass equation")
        self.speed = problem.speed or problem.guess_speed
        self.qd = quad_degree or (2 * max(etaspace.degree, uspace.degree) + 2)
        cs, D0, g = self.speed, problem.depth, problem.gravity
        kes = self.model.es_coefficient
        ca = self.model.graddiv_coefficient

        scalar = scalar_twin(uspace)
        M1 = assemble_mass_matrix(etaspace, self.qd).scipy()
        S1 = assemble_weighted_stiffness(etaspace, 1.0, self.qd).scipy()
        M2 = assemble_mass_matrix(scalar, self.qd).scipy()
        # full-gradient stiffness for the same reason as the Peregrine case:
        # the transverse part vanishes on line waves and stabilizes them
        S2 = assemble_weighted_stiffness(scalar, 1.0, self.qd).scipy()
        Mc = _cross_mass(etaspace, scalar, self.qd)

        import scipy.sparse as sp

        n1, n2 = etaspace.n_scalar, uspace.n_scalar
        top = sp.hstack([cs * M1 + kes * cs * D0**2 * S1, -D0 * Mc, sp.csr_matrix((n1, n2))])
        mid = sp.hstack([-g * Mc.T, cs * M2 + ca * cs * D0**2 * S2, sp.csr_matrix((n2, n2))])
        bot = sp.hstack([sp.csr_matrix((n2, n1)), sp.csr_matrix((n2, n2)), M2])
        self.matrix = SparseMatrix(sp.vstack([top, mid, bot]).tocsr(), symmetric=False)
        self._scalar = scalar
        self.n1, self.n2 = n1, n2

    def pack(self, state):
        return np.concatenate([state.eta, state.w])

    def unpack(self, vec):
        return vec[: self.n1], vec[self.n1 :]

    def nonlinearity_load(self, vec):
        """(N(w), chi) with N = (eta w, w^2/2, 0)."""
        rule = triangle_rule(self.qd)
        eta, w = self.unpack(vec)
        ev, _ = scalar_values(self.etaspace, eta, rule)
        wv, _ = scalar_values(self._scalar, w[: self.n2], rule)
        phi1, _, _, W = self.etaspace.tabulate(rule)
        phi2, _, _, _ = self._scalar.tabulate(rule)
        out = np.zeros(self.n1 + 2 * self.n2)
        np.add.at(out[: self.n1], self.etaspace.cell_dofs, np.einsum("cq,qn->cn", W * ev * wv, phi1))
        block = np.zeros(2 * self.n2)
        np.add.at(block, self._scalar.cell_dofs, np.einsum("cq,qn->cn", W * 0.5 * wv**2, phi2))
        out[self.n1 :] = block
        return out

    def solve(self, rhs, x0=None):
        x, report = bicgstab_solve(self.matrix, rhs, tol=1e-12, x0=x0)
        return x, report

    def diagnostics(self, vec):
        load = self.nonlinearity_load(vec)
        quad = float(vec @ self.matrix.matvec(vec))
        pair = float(load @ vec)
        residual = abs(quad - pair) / float(np.linalg.norm(vec))
        return load, quad, pair, residual


def _block_diag(a, b, symmetric):
    import scipy.sparse as sp

    return SparseMatrix(sp.block_diag([a, b]).tocsr(), symmetric=symmetric)


def _cross_mass(test_space, trial_space, quad_degree):
    """(phi_trial, phi_test) between two scalar spaces on one mesh."""
    import scipy.sparse as sp

    rule = triangle_rule(quad_degree)
    phi1, _, _, W = test_space.tabulate(rule)
    phi2, _, _, _ = trial_space.tabulate(rule)
    E = np.einsum("cq,qn,qm->cnm", W, phi1, phi2)
    n1, m1 = test_space.cell_dofs.shape[1], trial_space.cell_dofs.shape[1]
    rows = np.repeat(test_space.cell_dofs, m1, axis=1).ravel()
    cols = np.tile(trial_space.cell_dofs, (1, n1)).ravel()
    return sp.coo_matrix(
        (E.reshape(-1), (rows, cols)), shape=(test_space.n_scalar, trial_space.n_scalar)
    ).tocsr()


def _iterate(operator, problem, vec, maxiter):
    gamma = problem.gamma
    delta = problem.tolerance
    warm = None
    for n in range(maxiter + 1):
        load, quad, pair, residual = operator.diagnostics(vec)
        multiplier = quad / pair if pair != 0.0 else math.inf
        if residual < delta:
            return vec, multiplier, residual, n
        if n == maxiter:
            break
        rhs = (multiplier**gamma) * load
        vec, report = operator.solve(rhs, x0=warm)
        warm = vec
    raise NonConvergenceError(
        f"Petviashvili did not reach {delta:g} within {maxiter} iterations "
        f"(residual {residual:.3e})"
    )


def petviashvili_peregrine(problem, uspace, model=None, maxiter=200, initial=None):
    """Solitary wave of the Peregrine-family systems; returns a PetviashviliState."""
    op = PeregrineWaveOperator(problem, uspace, model)
    start = initial if initial is not None else initial_guess(problem, uspace, speed=op.speed)
    w, multiplier, residual, n = _iterate(op, problem, start.w, maxiter)
    return PetviashviliState(
        w=w, eta=None, multiplier=multiplier, residual=residual, iterations=n,
        system="peregrine", speed=op.speed,
    )


def petviashvili_bbm(problem, etaspace, uspace, model=None, maxiter=200, initial=None):
    """Solitary wave of the BBM-family systems (coupled eta-w iteration)."""
    op = BbmWaveOperator(problem, etaspace, uspace, model)
    start = (
        initial
        if initial is not None
        else initial_guess(problem, uspace, etaspace=etaspace, speed=op.speed)
    )
    vec, multiplier, residual, n = _iterate(op, problem, op.pack(start), maxiter)
    eta, w = op.unpack(vec)
    return PetviashviliState(
        w=w, eta=eta, multiplier=multiplier, residual=residual, iterations=n,
        system="bbm", speed=op.speed,
    )


def petviashvili_bbm_continuation(
    problem, etaspace, uspace, model=None, maxiter=200, step_fraction=0.01
):
    """March in speed from just above sqrt(g D0), warm-starting each solve.

    For BBM parameters without a known speed-amplitude relation: the target
    speed is problem.speed (or the sech^2 guess speed); each intermediate
    solve reuses the previous solution as its initial iterate.
    """
    c0 = math.sqrt(problem.gravity * problem.depth)
    target = problem.speed or problem.guess_speed
    if target <= c0:
        raise InvalidArgumentError("target speed must exceed sqrt(g D0)")
    dc = step_fraction * c0
    speeds = list(np.arange(c0 + dc, target, dc)) + [target]
    state = None
    for cs in speeds:
        p = replace(problem, speed=float(cs))
        state = petviashvili_bbm(p, etaspace, uspace, model, maxiter, initial=state)
    return state


def recover_fields(problem, state, etaspace, uspace):
    """(eta, u) initial data from a converged iterate.

    Peregrine: eta = D0 w / (c_s - w), L2-projected onto the eta space;
    BBM: eta is already an unknown.  u = w alpha + w~ alpha_perp.
    """
    n = uspace.n_scalar
    w, wt = state.w[:n], state.w[n:]
    ax, ay = problem.direction
    u = np.concatenate([ax * w + ay * wt, ay * w - ax * wt])
    if state.system == "bbm":
        eta = state.eta.copy()
    else:
        cs, D0 = state.speed, problem.depth
        scalar = scalar_twin(uspace)
        qd = 2 * max(etaspace.degree, uspace.degree) + 2
        rule = triangle_rule(qd)
        wv, _ = scalar_values(scalar, w, rule)
        gap = cs - wv
        if np.min(gap) <= 0.0:
            raise SingularNonlinearityError("c_s - w reached zero during recovery")
        vals = D0 * wv / gap
        phi, _, _, W = etaspace.tabulate(rule)
        b = np.zeros(etaspace.n_scalar)
        np.add.at(b, etaspace.cell_dofs, np.einsum("cq,qn->cn", W * vals, phi))
        M = assemble_mass_matrix(etaspace, qd)
        eta, _ = cg_solve(M, b, tol=1e-13)
    return FieldState(etaspace, uspace, eta, u, 0.0)
