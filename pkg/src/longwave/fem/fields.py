"""State and discretization records shared across modules."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidArgumentError

__all__ = ["FieldState", "Discretization"]


@dataclass
class FieldState:
    """Free-surface and velocity coefficient vectors at one time instant."""

    eta_space: object
    u_space: object
    eta: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.eta.shape != (self.eta_space.dim,):
            raise InvalidArgumentError("eta coefficient length does not match its space")
        if self.u.shape != (self.u_space.dim,):
            raise InvalidArgumentError("u coefficient length does not match its space")

    def validate_finite(self):
        if not (np.all(np.isfinite(self.eta)) and np.all(np.isfinite(self.u))):
            raise InvalidArgumentError("state contains non-finite entries")

    def copy(self):
        return replace(self, eta=self.eta.copy(), u=self.u.copy())

    @classmethod
    def zero(cls, eta_space, u_space, time=0.0):
        return cls(eta_space, u_space, eta_space.zeros(), u_space.zeros(), time)


@dataclass(frozen=True)
class Discretization:
    """Polynomial degrees, Nitsche constant and quadrature exactness."""

    r1: int = 1
    r2: int = 2
    nitsche_constant: float = 50.0
    quadrature_degree: int = 0  # 0 means the 2*max(r1,r2)+2 default

    def __post_init__(self):
        if self.r1 not in (1, 2, 3) or self.r2 not in (1, 2, 3):
            raise InvalidArgumentError("degrees must be in {1, 2, 3}")
        if self.nitsche_constant <= 0:
            raise InvalidArgumentError("the Nitsche constant must be positive")
        q = self.quadrature_degree or 2 * max(self.r1, self.r2) + 2
        if q < 2 * max(self.r1, self.r2) + 2:
            raise InvalidArgumentError("quadrature exactness below 2*max(r1,r2)+2")
        object.__setattr__(self, "quadrature_degree", q)
