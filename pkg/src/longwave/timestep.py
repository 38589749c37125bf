"""Explicit RK4 method-of-lines integration of the semidiscrete systems.

Each stage solves the constant-in-time operator systems

    mass_operator k_eta = F_s(state)      momentum_operator k_u = F_u(state)

with CG (symmetric operators) or BiCGStab.  Operators are assembled once per
run; with a wavemaker the dispersive coefficients still carry the static D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, InvalidArgumentError, LinearSolveError
from .fem.fields import FieldState
from .models import rhs_mass, rhs_momentum
from .sparse import solve

__all__ = ["Integrator", "rk4_step", "courant_number"]

_RK4_NODES = (0.0, 0.5, 0.5, 1.0)
_RK4_WEIGHTS = (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0)


@dataclass
class Integrator:
    """Time stepper bound to assembled operators.

    forcing_mass / forcing_momentum are optional time-dependent extra loads
    (manufactured-solution source terms): callables t -> vector.
    constrained_dofs carries the strong-Dirichlet rows of the simplified model.
    """

    dt: float
    mass_operator: object
    momentum_operator: object
    tol: float = 1e-10
    maxit: Optional[int] = None
    constrained_dofs: Optional[np.ndarray] = None
    forcing_mass: Optional[Callable] = None
    forcing_momentum: Optional[Callable] = None
    amplitude_floor: float = 0.01
    blowup_factor: float = 1e3
    _eta_cap: float = field(default=0.0, init=False, repr=False)
    _warm: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")

    def _solve(self, op, b, what):
        # Warm start from the previous solve of the same kind: stage rates
        # change O(dt) between stages, which cuts Krylov iterations sharply.
        x, report = solve(op, b, tol=self.tol, maxit=self.maxit, x0=self._warm.get(what))
        if not report.converged:
            raise LinearSolveError(f"{what} stage solve failed to converge", report=report)
        self._warm[what] = x
        return x

    def _stage_rate(self, model, bathymetry, state, sponge, wavemaker):
        fs = rhs_mass(model, bathymetry, state, sponge, wavemaker)
        fu = rhs_momentum(model, bathymetry, state, sponge, wavemaker)
        if self.forcing_mass is not None:
            fs = fs + self.forcing_mass(state.time)
        if self.forcing_momentum is not None:
            fu = fu + self.forcing_momentum(state.time)
        if self.constrained_dofs is not None:
            fu[self.constrained_dofs] = 0.0
        k_eta = self._solve(self.mass_operator, fs, "mass")
        k_u = self._solve(self.momentum_operator, fu, "momentum")
        return k_eta, k_u

    def step(self, model, bathymetry, state, sponge=None, wavemaker=None, functionals=None):
        """Advance one RK4 step; optionally RK4-integrate stage functionals.

        `functionals` maps names to callables (stage_state) -> float; the
        returned dict holds their integrals over the step with the same RK
        weights, so tracked budgets carry no extra time-discretization error.
        """
        if self._eta_cap == 0.0:
            amp0 = float(np.max(np.abs(state.eta))) if state.eta.size else 0.0
            self._eta_cap = self.blowup_factor * max(amp0, self.amplitude_floor)

        dt = self.dt
        tracked = {k: 0.0 for k in (functionals or {})}
        k_eta = np.zeros((4, state.eta.size))
        k_u = np.zeros((4, state.u.size))
        stage = state
        for s, (c, w) in enumerate(zip(_RK4_NODES, _RK4_WEIGHTS)):
            if s > 0:
                frac = 0.5 if s in (1, 2) else 1.0
                stage = FieldState(
                    state.eta_space,
                    state.u_space,
                    state.eta + dt * frac * k_eta[s - 1],
                    state.u + dt * frac * k_u[s - 1],
                    state.time + dt * c,
                )
            if functionals:
                for name, fn in functionals.items():
                    tracked[name] += dt * w * fn(stage)
            k_eta[s], k_u[s] = self._stage_rate(model, bathymetry, stage, sponge, wavemaker)

        eta = state.eta + dt * sum(w * k for w, k in zip(_RK4_WEIGHTS, k_eta))
        u = state.u + dt * sum(w * k for w, k in zip(_RK4_WEIGHTS, k_u))
        new = FieldState(state.eta_space, state.u_space, eta, u, state.time + dt)
        self._check_blowup(new)
        return new if functionals is None else (new, tracked)

    def _check_blowup(self, state):
        if not (np.all(np.isfinite(state.eta)) and np.all(np.isfinite(state.u))):
            raise BlowUpError(f"non-finite state at t = {state.time:.6g} (Courant violation?)")
        amp = float(np.max(np.abs(state.eta)))
        if amp > self._eta_cap:
            raise BlowUpError(
                f"|eta| = {amp:.3g} exceeded the cap {self._eta_cap:.3g} at t = {state.time:.6g}"
            )


def rk4_step(integrator, model, bathymetry, state, sponge=None, wavemaker=None):
    """One classical four-stage RK4 step; returns the state at t + dt."""
    return integrator.step(model, bathymetry, state, sponge, wavemaker)


def courant_number(amplitude, depth, gravity, dt, h_min):
    """sqrt(g (D + A)) * dt / h_min."""
    if h_min <= 0:
        raise InvalidArgumentError("h_min must be positive")
    if depth + amplitude <= 0:
        raise InvalidArgumentError("D + A must be positive")
    return math.sqrt(gravity * (depth + amplitude)) * dt / h_min
