"""The Boussinesq-Peregrine model family and its semidiscrete right-hand sides.

Four systems share the compact form

    d/dt E_s(eta) + div((D + eta) u) = 0
    d/dt E(u) + N(u) + g grad(eta)   = 0

and differ in the regularization operators E_s, E and the nonlinearity N:

    classical   E_s = I                E = I - 1/2 D grad(div(D.)) + 1/6 D^2 grad(div .)   N = (u.grad)u
    simplified  E_s = I                E = I - 1/3 D^2 Lap                                 N = 1/2 grad|u|^2
    modified    E_s = I                E = I - 1/3 D^2 grad(div .)                         N = 1/2 grad|u|^2
    bbm         E_s = I - (a~+b~) div(D^2 grad .)   E = I + c~ D grad(div(D.)) + d~ D^2 grad(div .)   N = (u.grad)u

with the theta-family coefficients a~ = theta - 1/2, b~ = ((theta-1)^2 - 1/3)/2,
c~ = theta - 1, d~ = (theta-1)^2 / 2 and the default theta = sqrt(2/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .fem.assembly import scalar_values, vector_values
from .fem.quadrature import triangle_rule

__all__ = [
    "ModelSpec",
    "SpongeSpec",
    "SpongeRegion",
    "WavemakerSpec",
    "make_model",
    "theta_coefficients",
    "rhs_mass",
    "rhs_momentum",
    "phase_speed",
    "BBM_THETA",
]

MODEL_KINDS = ("classical", "simplified", "modified", "bbm")
BBM_THETA = math.sqrt(2.0 / 3.0)


def theta_coefficients(theta):
    """Coefficients (a~, b~, c~, d~) of the theta-family."""
    a = theta - 0.5
    b = 0.5 * ((theta - 1.0) ** 2 - 1.0 / 3.0)
    c = theta - 1.0
    d = 0.5 * (theta - 1.0) ** 2
    return a, b, c, d


@dataclass(frozen=True)
class ModelSpec:
    """One row of the model table plus gravity and the nonlinearity choice."""

    kind: str
    gravity: float
    nonlinearity: str  # "advective" or "conservative"
    theta: Optional[float] = None
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @property
    def es_coefficient(self):
        """Weight of (D^2 grad eta, grad psi) in the mass operator (a~ + b~)."""
        return self.a + self.b if self.kind == "bbm" else 0.0

    @property
    def uses_laplacian(self):
        return self.kind == "simplified"

    @property
    def laplacian_coefficient(self):
        return 1.0 / 3.0

    @property
    def beta1(self):
        """Coefficient of D grad(div(D u)) in E."""
        if self.kind == "classical":
            return -0.5
        if self.kind == "modified":
            return 0.0
        if self.kind == "bbm":
            return self.c
        raise InvalidArgumentError("simplified model has no grad-div form")

    @property
    def beta2(self):
        """Coefficient of D^2 grad(div u) in E."""
        if self.kind == "classical":
            return 1.0 / 6.0
        if self.kind == "modified":
            return -1.0 / 3.0
        if self.kind == "bbm":
            return self.d
        raise InvalidArgumentError("simplified model has no grad-div form")

    @property
    def graddiv_coefficient(self):
        """-(beta1 + beta2): weight of (div(Du), div(Dv)) and the Nitsche penalty."""
        return -(self.beta1 + self.beta2)

    @property
    def boundary_condition(self):
        return "noslip" if self.kind == "simplified" else "slip"


def make_model(kind, theta=None, gravity=9.81, nonlinearity=None):
    """Build a ModelSpec; theta is only meaningful (and defaulted) for "bbm"."""
    if kind not in MODEL_KINDS:
        raise InvalidArgumentError(f"unknown model kind {kind!r}")
    if gravity <= 0:
        raise InvalidArgumentError("gravity must be positive")
    if kind == "bbm":
        theta = BBM_THETA if theta is None else float(theta)
        if not (1.0 / 3.0 - 1e-12 <= theta**2 <= 1.0 + 1e-12):
            raise InvalidArgumentError("theta must satisfy 1/3 <= theta^2 <= 1")
        a, b, c, d = theta_coefficients(theta)
    elif theta is not None:
        raise InvalidArgumentError("theta applies to the bbm family only")
    else:
        a = b = c = d = 0.0
    default_nl = "conservative" if kind in ("simplified", "modified") else "advective"
    nonlinearity = nonlinearity or default_nl
    if nonlinearity not in ("advective", "conservative"):
        raise InvalidArgumentError(f"unknown nonlinearity {nonlinearity!r}")
    return ModelSpec(
        kind=kind, gravity=gravity, nonlinearity=nonlinearity, theta=theta, a=a, b=b, c=c, d=d
    )


# -- sponge layers -------------------------------------------------------------


@dataclass(frozen=True)
class SpongeRegion:
    """Quadratic damping ramp: 0 at x=start rising to full strength at x=end."""

    start: float
    end: float

    def profile(self, x):
        t = (np.asarray(x, dtype=float) - self.start) / (self.end - self.start)
        return np.clip(t, 0.0, 1.0) ** 2


@dataclass(frozen=True)
class SpongeSpec:
    regions: tuple
    strength: float = 10.0  # mu_max, 1/s

    def __post_init__(self):
        if self.strength < 0:
            raise InvalidArgumentError("sponge strength must be nonnegative")

    def mu(self, x, y=None):
        out = np.zeros(np.shape(x))
        for r in self.regions:
            out = np.maximum(out, self.strength * r.profile(x))
        return out


# -- wavemaker ------------------------------------------------------------------


@dataclass(frozen=True)
class WavemakerSpec:
    """Oscillating Gaussian bump: zeta = a exp(-4 (x-x_c)^2) cos(-omega t)."""

    amplitude: float
    center: float
    period: float

    def __post_init__(self):
        if self.amplitude <= 0 or self.period <= 0:
            raise InvalidArgumentError("wavemaker amplitude and period must be positive")

    @property
    def omega(self):
        return 2.0 * math.pi / self.period

    def _bump(self, x):
        return self.amplitude * np.exp(-4.0 * (np.asarray(x, dtype=float) - self.center) ** 2)

    def _bump_x(self, x):
        x = np.asarray(x, dtype=float)
        return -8.0 * (x - self.center) * self._bump(x)

    def zeta(self, x, y, t):
        return self._bump(x) * np.cos(-self.omega * t)

    def zeta_t(self, x, y, t):
        return -self.omega * self._bump(x) * np.sin(self.omega * t)

    def zeta_tt(self, x, y, t):
        return -self.omega**2 * self._bump(x) * np.cos(self.omega * t)

    def grad_zeta(self, x, y, t):
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = self._bump_x(x) * np.cos(-self.omega * t)
        return g

    def grad_zeta_t(self, x, y, t):
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = -self.omega * self._bump_x(x) * np.sin(self.omega * t)
        return g

    def grad_zeta_tt(self, x, y, t):
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = -self.omega**2 * self._bump_x(x) * np.cos(self.omega * t)
        return g


# -- semidiscrete right-hand sides ----------------------------------------------


def _quad_degree(state):
    return 2 * max(state.eta_space.degree, state.u_space.degree) + 2


def rhs_mass(model, bathymetry, state, sponge=None, wavemaker=None, quad_degree=None):
    """Load vector F_s(eta_h, u_h; psi) = -(div((D+zeta+eta_h) u_h), psi) + sources.

    Wavemaker sources (moving bottom): -(zeta_t, psi) for every system, plus
    +(a~ D^2 grad zeta_t, grad psi) for the BBM family.  Sponge damping adds
    -(mu eta_h, psi).
    """
    q = quad_degree or _quad_degree(state)
    rule = triangle_rule(q)
    space = state.eta_space
    phi, gradphi, X, W = space.tabulate(rule)
    x, y = X[..., 0], X[..., 1]
    wavemaker = wavemaker or bathymetry.moving_part

    eta, geta = scalar_values(space, state.eta, rule)
    u, ju = vector_values(state.u_space, state.u, rule)
    divu = ju[..., 0, 0] + ju[..., 1, 1]
    D = bathymetry(x, y)
    gD = bathymetry.gradient(x, y)
    total = D + eta
    gtot = gD + geta
    if wavemaker is not None:
        total = total + wavemaker.zeta(x, y, state.time)
        gtot = gtot + wavemaker.grad_zeta(x, y, state.time)
    divflux = total * divu + np.einsum("cqi,cqi->cq", u, gtot)

    integrand = -divflux
    if wavemaker is not None:
        integrand = integrand - wavemaker.zeta_t(x, y, state.time)
    if sponge is not None:
        integrand = integrand - sponge.mu(x, y) * eta

    out = np.zeros(space.dim)
    e = np.einsum("cq,qn->cn", W * integrand, phi)
    np.add.at(out, space.cell_dofs, e)

    if wavemaker is not None and model.es_coefficient:
        gzt = wavemaker.grad_zeta_t(x, y, state.time)
        e = model.a * np.einsum("cq,cqi,cqni->cn", W * D**2, gzt, gradphi)
        np.add.at(out, space.cell_dofs, e)
    return out


def rhs_momentum(model, bathymetry, state, sponge=None, wavemaker=None, quad_degree=None):
    """Load vector F_u = -(N(u_h), phi) - g(grad eta_h, phi) + sources.

    Wavemaker forcing: +(D/2 grad zeta_tt, phi) for the Peregrine family,
    -c~ (D grad zeta_tt, phi) for BBM.  Sponge damping adds -(mu u_h, phi).
    """
    q = quad_degree or _quad_degree(state)
    rule = triangle_rule(q)
    uspace = state.u_space
    phi, _, X, W = uspace.tabulate(rule)
    x, y = X[..., 0], X[..., 1]
    wavemaker = wavemaker or bathymetry.moving_part

    _, geta = scalar_values(state.eta_space, state.eta, rule)
    u, ju = vector_values(uspace, state.u, rule)
    if model.nonlinearity == "advective":
        nl = np.einsum("cqij,cqj->cqi", ju, u)  # (u.grad)u, rows of ju are grads
    else:
        nl = np.einsum("cqji,cqj->cqi", ju, u)  # 1/2 grad|u|^2 = (grad u)^T u

    integrand = -nl - model.gravity * geta
    if sponge is not None:
        integrand = integrand - sponge.mu(x, y)[..., None] * u
    if wavemaker is not None:
        D = bathymetry(x, y)
        gztt = wavemaker.grad_zeta_tt(x, y, state.time)
        if model.kind == "bbm":
            integrand = integrand - model.c * D[..., None] * gztt
        else:
            integrand = integrand + 0.5 * D[..., None] * gztt

    out = np.zeros(uspace.dim)
    n = uspace.n_scalar
    for comp in range(2):
        e = np.einsum("cq,qn->cn", W * integrand[..., comp], phi)
        np.add.at(out, uspace.cell_dofs + comp * n, e)
    return out


# -- linear dispersion ------------------------------------------------------------


def phase_speed(family, dk):
    """Normalized phase speed c / sqrt(gD) at dimensionless wavenumber Dk.

    bbm: 1/(1 + (Dk)^2/6); peregrine: 1/sqrt(1 + (Dk)^2/3);
    euler: sqrt(tanh(Dk)/Dk) with the long-wave limit 1 at Dk = 0.
    """
    dk = np.asarray(dk, dtype=float)
    if np.any(dk < 0):
        raise InvalidArgumentError("Dk must be nonnegative")
    if family == "bbm":
        out = 1.0 / (1.0 + dk**2 / 6.0)
    elif family == "peregrine":
        out = 1.0 / np.sqrt(1.0 + dk**2 / 3.0)
    elif family == "euler":
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.sqrt(np.where(dk > 0, np.tanh(dk) / np.where(dk > 0, dk, 1.0), 1.0))
    else:
        raise InvalidArgumentError(f"unknown dispersion family {family!r}")
    return out if out.shape else float(out)
