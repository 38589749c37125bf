"""Convergence-rate verification: manufactured solutions, EOC tables, mass drift.

The elliptic and semidiscrete studies run on uniform "crossed" meshes of the
unit square (4 triangles per cell), which reproduce the convergence behavior
the reference tables report for uniform triangulations; fixed-diagonal meshes
superconverge differently on the grad-div operator and are not used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, UndefinedRateError
from .fem import (
    FieldState,
    FunctionSpace,
    assemble_load,
    assemble_mass_operator,
    assemble_momentum_operator,
    constrained_dofs,
    error_norms,
    flat_bathymetry,
    integrate_field,
    l2_project,
    linear_bathymetry,
    mass_form_applied,
    momentum_form_applied,
)
from .mesh import build_rectangle_mesh
from .models import make_model
from .timestep import Integrator

__all__ = [
    "eoc",
    "ConvergenceRecord",
    "MmsCase",
    "EllipticVelocity",
    "ManufacturedVelocity",
    "SimplifiedManufacturedVelocity",
    "ManufacturedSurface",
    "standard_slope",
    "standard_mms_case",
    "elliptic_forcing",
    "run_elliptic_study",
    "run_mms_study",
    "track_mass",
]

UNIT_SQUARE = (0.0, 1.0, 0.0, 1.0)


def eoc(errors, hs):
    """Experimental order of convergence log(E1/E2)/log(h1/h2) per adjacent pair."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape or errors.ndim != 1 or errors.size < 2:
        raise InvalidArgumentError("errors and hs must be equal-length 1D sequences")
    if np.any(errors <= 0):
        raise UndefinedRateError("convergence rate undefined for nonpositive errors")
    if np.any(hs <= 0) or np.any(np.diff(hs) >= 0):
        raise InvalidArgumentError("mesh sizes must be positive and strictly decreasing")
    return np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])


@dataclass
class ConvergenceRecord:
    """Errors per variable and norm over a mesh sequence, with EOC helpers."""

    hs: list
    errors: dict  # variable -> norm -> list of errors
    meta: dict = field(default_factory=dict)

    def rates(self, variable, norm):
        return eoc(self.errors[variable][norm], self.hs)

    def final_rate(self, variable, norm):
        return float(self.rates(variable, norm)[-1])

    def columns(self):
        cols = []
        for var in self.errors:
            for norm in self.errors[var]:
                cols.append((var, norm))
        return cols

    def to_csv(self, path):
        cols = self.columns()
        header = ["h"]
        for var, norm in cols:
            header += [f"err_{var}_{norm}", f"eoc_{var}_{norm}"]
        rates = {c: self.rates(*c) for c in cols}
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for i, h in enumerate(self.hs):
                row = [f"{h:.17g}"]
                for c in cols:
                    row.append(f"{self.errors[c[0]][c[1]][i]:.17g}")
                    row.append("" if i == 0 else f"{rates[c][i - 1]:.17g}")
                fh.write(",".join(row) + "\n")

    def to_text(self):
        cols = self.columns()
        rates = {c: self.rates(*c) for c in cols}
        lines = []
        head = f"{'h':>12}"
        for var, norm in cols:
            head += f"{f'E_{norm}({var})':>14}{'EOC':>8}"
        lines.append(head)
        for i, h in enumerate(self.hs):
            row = f"{h:12.4e}"
            for c in cols:
                row += f"{self.errors[c[0]][c[1]][i]:14.4e}"
                row += "        " if i == 0 else f"{rates[c][i - 1]:8.3f}"
            lines.append(row)
        return "\n".join(lines)


# -- manufactured fields ---------------------------------------------------------


class EllipticVelocity:
    """Static velocity (cos(pi y/2) sin(pi x), cos(pi x/2) sin(pi y)); u.n = 0."""

    def __call__(self, x, y):
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0] = np.cos(np.pi * y / 2) * np.sin(np.pi * x)
        out[..., 1] = np.cos(np.pi * x / 2) * np.sin(np.pi * y)
        return out

    def jacobian(self, x, y):
        J = np.zeros(np.shape(x) + (2, 2))
        J[..., 0, 0] = np.pi * np.cos(np.pi * y / 2) * np.cos(np.pi * x)
        J[..., 0, 1] = -np.pi / 2 * np.sin(np.pi * y / 2) * np.sin(np.pi * x)
        J[..., 1, 0] = -np.pi / 2 * np.sin(np.pi * x / 2) * np.sin(np.pi * y)
        J[..., 1, 1] = np.pi * np.cos(np.pi * x / 2) * np.cos(np.pi * y)
        return J

    def divergence(self, x, y):
        return np.pi * (
            np.cos(np.pi * y / 2) * np.cos(np.pi * x) + np.cos(np.pi * x / 2) * np.cos(np.pi * y)
        )

    def grad_divergence(self, x, y):
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = -(np.pi**2) * (
            np.sin(np.pi * x) * np.cos(np.pi * y / 2) + 0.5 * np.sin(np.pi * x / 2) * np.cos(np.pi * y)
        )
        g[..., 1] = -(np.pi**2) * (
            0.5 * np.sin(np.pi * y / 2) * np.cos(np.pi * x) + np.sin(np.pi * y) * np.cos(np.pi * x / 2)
        )
        return g


def elliptic_forcing(exact, bathymetry, model):
    """f = E(u_exact) for bathymetries with constant gradient."""

    def f(x, y):
        u = exact(x, y)
        J = exact.jacobian(x, y)
        div = exact.divergence(x, y)
        gdiv = exact.grad_divergence(x, y)
        D = bathymetry(x, y)
        gD = bathymetry.gradient(x, y)
        hess = bathymetry.hessian(x, y)
        # grad(div(Du)) = gD div + D grad(div) + J^T gD + (Hess D) u
        graddivDu = (
            gD * div[..., None]
            + D[..., None] * gdiv
            + np.einsum("...ji,...j->...i", J, gD)
            + np.einsum("...ij,...j->...i", hess, u)
        )
        return u + model.beta1 * D[..., None] * graddivDu + model.beta2 * (D**2)[..., None] * gdiv

    return f


class _FrozenVector:
    """Time slice of a time-dependent vector field, for assembly and norms."""

    def __init__(self, parent, t, derivative=False):
        self._p, self._t, self._d = parent, t, derivative

    def __call__(self, x, y):
        return self._p.dt_value(x, y, self._t) if self._d else self._p.value(x, y, self._t)

    def jacobian(self, x, y):
        return self._p.dt_jacobian(x, y, self._t) if self._d else self._p.jacobian(x, y, self._t)

    def divergence(self, x, y):
        J = self.jacobian(x, y)
        return J[..., 0, 0] + J[..., 1, 1]


class _FrozenScalar:
    def __init__(self, parent, t, derivative=False):
        self._p, self._t, self._d = parent, t, derivative

    def __call__(self, x, y):
        return self._p.dt_value(x, y, self._t) if self._d else self._p.value(x, y, self._t)

    def gradient(self, x, y):
        return self._p.dt_gradient(x, y, self._t) if self._d else self._p.gradient(x, y, self._t)


class ManufacturedVelocity:
    """u(x, t) = exp((x+y)t) (cos(pi y/2) sin(pi x), cos(pi x/2) sin(pi y))."""

    def _parts(self, x, y):
        a1 = np.cos(np.pi * y / 2) * np.sin(np.pi * x)
        a2 = np.cos(np.pi * x / 2) * np.sin(np.pi * y)
        a1x = np.pi * np.cos(np.pi * y / 2) * np.cos(np.pi * x)
        a1y = -np.pi / 2 * np.sin(np.pi * y / 2) * np.sin(np.pi * x)
        a2x = -np.pi / 2 * np.sin(np.pi * x / 2) * np.sin(np.pi * y)
        a2y = np.pi * np.cos(np.pi * x / 2) * np.cos(np.pi * y)
        return a1, a2, a1x, a1y, a2x, a2y

    def value(self, x, y, t):
        a1, a2, *_ = self._parts(x, y)
        E = np.exp((x + y) * t)
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0] = E * a1
        out[..., 1] = E * a2
        return out

    def jacobian(self, x, y, t):
        a1, a2, a1x, a1y, a2x, a2y = self._parts(x, y)
        E = np.exp((x + y) * t)
        J = np.zeros(np.shape(x) + (2, 2))
        J[..., 0, 0] = E * (t * a1 + a1x)
        J[..., 0, 1] = E * (t * a1 + a1y)
        J[..., 1, 0] = E * (t * a2 + a2x)
        J[..., 1, 1] = E * (t * a2 + a2y)
        return J

    def dt_value(self, x, y, t):
        s = np.asarray(x) + np.asarray(y)
        return s[..., None] * self.value(x, y, t)

    def dt_jacobian(self, x, y, t):
        a1, a2, a1x, a1y, a2x, a2y = self._parts(x, y)
        E = np.exp((x + y) * t)
        s = np.asarray(x) + np.asarray(y)
        J = np.zeros(np.shape(x) + (2, 2))
        J[..., 0, 0] = E * (a1 + s * (t * a1 + a1x))
        J[..., 0, 1] = E * (a1 + s * (t * a1 + a1y))
        J[..., 1, 0] = E * (a2 + s * (t * a2 + a2x))
        J[..., 1, 1] = E * (a2 + s * (t * a2 + a2y))
        return J

    def at(self, t):
        return _FrozenVector(self, t)

    def dt_at(self, t):
        return _FrozenVector(self, t, derivative=True)


class SimplifiedManufacturedVelocity:
    """u(x, t) = exp(t) (x cos(pi x/2) sin(pi y), y cos(pi y/2) sin(pi x)); u = 0 on the boundary."""

    def _parts(self, x, y):
        b1 = x * np.cos(np.pi * x / 2) * np.sin(np.pi * y)
        b2 = y * np.cos(np.pi * y / 2) * np.sin(np.pi * x)
        b1x = (np.cos(np.pi * x / 2) - np.pi / 2 * x * np.sin(np.pi * x / 2)) * np.sin(np.pi * y)
        b1y = np.pi * x * np.cos(np.pi * x / 2) * np.cos(np.pi * y)
        b2x = np.pi * y * np.cos(np.pi * y / 2) * np.cos(np.pi * x)
        b2y = (np.cos(np.pi * y / 2) - np.pi / 2 * y * np.sin(np.pi * y / 2)) * np.sin(np.pi * x)
        return b1, b2, b1x, b1y, b2x, b2y

    def value(self, x, y, t):
        b1, b2, *_ = self._parts(x, y)
        E = np.exp(t)
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0] = E * b1
        out[..., 1] = E * b2
        return out

    def jacobian(self, x, y, t):
        b1, b2, b1x, b1y, b2x, b2y = self._parts(x, y)
        E = np.exp(t)
        J = np.zeros(np.shape(x) + (2, 2))
        J[..., 0, 0] = E * b1x
        J[..., 0, 1] = E * b1y
        J[..., 1, 0] = E * b2x
        J[..., 1, 1] = E * b2y
        return J

    def dt_value(self, x, y, t):
        return self.value(x, y, t)

    def dt_jacobian(self, x, y, t):
        return self.jacobian(x, y, t)

    def at(self, t):
        return _FrozenVector(self, t)

    def dt_at(self, t):
        return _FrozenVector(self, t, derivative=True)


class ManufacturedSurface:
    """eta(x, t) = exp(t) cos(pi x) sin(pi y)."""

    def value(self, x, y, t):
        return np.exp(t) * np.cos(np.pi * x) * np.sin(np.pi * y)

    def gradient(self, x, y, t):
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = -np.pi * np.exp(t) * np.sin(np.pi * x) * np.sin(np.pi * y)
        g[..., 1] = np.pi * np.exp(t) * np.cos(np.pi * x) * np.cos(np.pi * y)
        return g

    dt_value = value
    dt_gradient = gradient

    def at(self, t):
        return _FrozenScalar(self, t)

    def dt_at(self, t):
        return _FrozenScalar(self, t, derivative=True)


def standard_slope():
    """The sloping bottom D = -(x+y)/20 + 3/2 of the verification studies."""
    return linear_bathymetry(-1.0 / 20.0, -1.0 / 20.0, 1.5)


@dataclass(frozen=True)
class MmsCase:
    """Exact fields, bathymetry and model of one manufactured time-dependent run."""

    eta: object
    u: object
    bathymetry: object
    model: object
    final_time: float = 1.0
    dt: float = 5e-3


def standard_mms_case(model_kind, theta=None, final_time=1.0, dt=5e-3, gravity=1.0):
    model = make_model(model_kind, theta=theta, gravity=gravity)
    u = SimplifiedManufacturedVelocity() if model_kind == "simplified" else ManufacturedVelocity()
    return MmsCase(
        eta=ManufacturedSurface(),
        u=u,
        bathymetry=standard_slope(),
        model=model,
        final_time=final_time,
        dt=dt,
    )


# -- studies ----------------------------------------------------------------------


def run_elliptic_study(
    bathymetry,
    degree,
    nitsche_constant=50.0,
    resolutions=(8, 12, 16, 24, 32),
    diagonal="crossed",
    solver_tol=1e-9,
    exact=None,
):
    """Solve E(u) = f with the manufactured velocity on a mesh sequence.

    Records L2 / H1 / H(div) errors of u; the reported h is the cell edge 1/n.
    """
    from .sparse import solve

    exact = exact or EllipticVelocity()
    model = make_model("classical", gravity=1.0)
    f = elliptic_forcing(exact, bathymetry, model)
    hs, e_l2, e_h1, e_hd = [], [], [], []
    for n in resolutions:
        mesh = build_rectangle_mesh(UNIT_SQUARE, n, n, diagonal=diagonal)
        U = FunctionSpace(mesh, degree, components=2)
        A = assemble_momentum_operator(U, bathymetry, model, nitsche_constant)
        b = assemble_load(U, f)
        x, report = solve(A, b, tol=solver_tol)
        if not report.converged:
            raise InvalidArgumentError(
                f"elliptic solve failed at n={n}: residual {report.final_residual:.3e}"
            )
        e = error_norms(U, x, exact)
        hs.append(1.0 / n)
        e_l2.append(e.l2)
        e_h1.append(e.h1)
        e_hd.append(e.hdiv)
    return ConvergenceRecord(
        hs=hs,
        errors={"u": {"l2": e_l2, "h1": e_h1, "hdiv": e_hd}},
        meta={"degree": degree, "nitsche_constant": nitsche_constant},
    )


def run_mms_study(
    case,
    r1,
    r2,
    resolutions=(8, 12, 16, 24),
    nitsche_constant=50.0,
    diagonal="crossed",
    solver_tol=1e-9,
):
    """Integrate the manufactured non-homogeneous system to T per mesh; EOC table.

    Forcing is assembled in the consistent weak form: the scheme's bilinear
    forms applied to the exact solution's time derivative, plus the flux,
    nonlinearity and gravity loads evaluated from the exact fields.
    """
    model, bathy = case.model, case.bathymetry
    g = model.gravity
    hs = []
    errs = {"eta": {"l2": [], "h1": []}, "u": {"l2": [], "h1": [], "hdiv": []}}
    for n in resolutions:
        mesh = build_rectangle_mesh(UNIT_SQUARE, n, n, diagonal=diagonal)
        Veta = FunctionSpace(mesh, r1)
        Vu = FunctionSpace(mesh, r2, components=2)
        qd = 2 * max(r1, r2) + 2
        mass_op = assemble_mass_operator(Veta, bathy, model, qd)
        mom_op = assemble_momentum_operator(Vu, bathy, model, nitsche_constant, qd)

        def flux_div(t):
            def f(x, y):
                eta = case.eta.value(x, y, t)
                geta = case.eta.gradient(x, y, t)
                u = case.u.value(x, y, t)
                J = case.u.jacobian(x, y, t)
                D = bathy(x, y)
                gD = bathy.gradient(x, y)
                divu = J[..., 0, 0] + J[..., 1, 1]
                return (D + eta) * divu + np.einsum("...i,...i->...", u, gD + geta)

            return f

        def nl_grav(t):
            def f(x, y):
                u = case.u.value(x, y, t)
                J = case.u.jacobian(x, y, t)
                if model.nonlinearity == "advective":
                    nl = np.einsum("...ij,...j->...i", J, u)
                else:
                    nl = np.einsum("...ji,...j->...i", J, u)
                return nl + g * case.eta.gradient(x, y, t)

            return f

        def forcing_mass(t):
            out = mass_form_applied(Veta, bathy, model, case.eta.dt_at(t), qd)
            out += assemble_load(Veta, flux_div(t), qd)
            return out

        def forcing_momentum(t):
            out = momentum_form_applied(Vu, bathy, model, case.u.dt_at(t), nitsche_constant, qd)
            out += assemble_load(Vu, nl_grav(t), qd)
            return out

        integ = Integrator(
            dt=case.dt,
            mass_operator=mass_op,
            momentum_operator=mom_op,
            tol=solver_tol,
            constrained_dofs=constrained_dofs(Vu, model),
            forcing_mass=forcing_mass,
            forcing_momentum=forcing_momentum,
            amplitude_floor=10.0,  # MMS fields are O(e^2), not water waves
        )
        eta0 = l2_project(Veta, lambda x, y: case.eta.value(x, y, 0.0), qd)
        u0 = l2_project(Vu, lambda x, y: case.u.value(x, y, 0.0), qd)
        state = FieldState(Veta, Vu, eta0, u0, 0.0)
        nsteps = round(case.final_time / case.dt)
        for _ in range(nsteps):
            state = integ.step(model, bathy, state)

        T = state.time
        ee = error_norms(Veta, state.eta, case.eta.at(T), qd)
        eu = error_norms(Vu, state.u, case.u.at(T), qd)
        hs.append(1.0 / n)
        errs["eta"]["l2"].append(ee.l2)
        errs["eta"]["h1"].append(ee.h1)
        errs["u"]["l2"].append(eu.l2)
        errs["u"]["h1"].append(eu.h1)
        errs["u"]["hdiv"].append(eu.hdiv)
    return ConvergenceRecord(hs=hs, errors=errs, meta={"r1": r1, "r2": r2, "model": model.kind})


def track_mass(space, eta_history, quad_degree=None):
    """|int eta(t) - int eta(0)| per sample, by exact quadrature of the FE function."""
    etas = list(eta_history)
    if not etas:
        return np.zeros(0)
    m0 = integrate_field(space, etas[0], quad_degree)
    return np.array([abs(integrate_field(space, e, quad_degree) - m0) for e in etas])
