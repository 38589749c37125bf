"""Bottom topography: static depth D(x, y) > 0 with analytic gradient.

The gradient (and optional Hessian, needed only for manufactured forcing) is
always supplied in closed form, never by differentiating an interpolant.  An
optional moving part (wavemaker bump) rides on top of the static depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidArgumentError

__all__ = ["Bathymetry", "flat_bathymetry", "linear_bathymetry"]


def _zero_gradient(x, y):
    return np.zeros(np.shape(x) + (2,))


@dataclass(frozen=True)
class Bathymetry:
    """Depth field; callables are vectorized over point arrays.

    depth(x, y) -> (...,); depth_gradient(x, y) -> (..., 2);
    depth_hessian(x, y) -> (..., 2, 2) (optional, defaults to zero);
    moving_part: optional wavemaker-style object with zeta/zeta_t/zeta_tt.
    """

    depth: Callable
    depth_gradient: Callable
    depth_hessian: Optional[Callable] = None
    moving_part: Optional[object] = None

    def __call__(self, x, y):
        return np.asarray(self.depth(x, y), dtype=float)

    def gradient(self, x, y):
        return np.asarray(self.depth_gradient(x, y), dtype=float)

    def hessian(self, x, y):
        if self.depth_hessian is None:
            return np.zeros(np.shape(x) + (2, 2))
        return np.asarray(self.depth_hessian(x, y), dtype=float)

    @property
    def is_flat(self):
        return getattr(self, "_flat", False)

    def check_positive(self, x, y):
        d = self(x, y)
        if not np.all(np.isfinite(d)) or np.min(d) <= 0.0:
            raise InvalidArgumentError("depth must be strictly positive on the domain")
        return d


def flat_bathymetry(depth):
    """Constant depth D0 > 0."""
    if depth <= 0:
        raise InvalidArgumentError("depth must be positive")
    d0 = float(depth)
    b = Bathymetry(
        depth=lambda x, y: np.full(np.shape(x), d0),
        depth_gradient=_zero_gradient,
    )
    object.__setattr__(b, "_flat", True)
    return b


def linear_bathymetry(gx, gy, offset):
    """D(x, y) = gx*x + gy*y + offset (constant gradient)."""

    def depth(x, y):
        return gx * np.asarray(x, dtype=float) + gy * np.asarray(y, dtype=float) + offset

    def grad(x, y):
        g = np.empty(np.shape(x) + (2,))
        g[..., 0] = gx
        g[..., 1] = gy
        return g

    b = Bathymetry(depth=depth, depth_gradient=grad)
    if gx == 0.0 and gy == 0.0:
        object.__setattr__(b, "_flat", True)
    return b
