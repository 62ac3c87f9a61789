"""Radial quintic bump functions.

One C^2 profile serves two roles: compactly supported test functions f for
the resolvent functional (height at the center, vanishing to second order
at the support boundary), and the complementary cutoff g used by the
truncation-parameter bounds (0 at the center, 1 outside the unit ball).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Bump", "smoothstep", "CUT_SUP_NORM", "CUT_GRAD_NORM", "CUT_HESS_NORM"]


def smoothstep(r):
    """Quintic smoothstep s with s(0)=0, s(1)=1 and vanishing first and
    second derivatives at both ends; clamped outside [0,1]."""
    r = np.clip(np.asarray(r, dtype=np.float64), 0.0, 1.0)
    return r * r * r * (10.0 - 15.0 * r + 6.0 * r * r)


# norms of the radial cutoff g(y) = smoothstep(|y|):
# sup |s'| = 30 (1/2)^2 (1/2)^2, sup |s''| = 10/sqrt(3) at r = 1/2 -+ 1/sqrt(12),
# and sup s'(r)/r = 40/9 < sup |s''|, so the Hessian norm is 10/sqrt(3)
CUT_SUP_NORM = 1.0
CUT_GRAD_NORM = 1.875
CUT_HESS_NORM = 10.0 / math.sqrt(3.0)


@dataclass
class Bump:
    """f(x) = height * (1 - smoothstep(|x - center| / radius)).

    Smooth (C^2), supported in the closed ball of the given radius, with
    sup norm equal to height.
    """

    center: np.ndarray
    radius: float
    height: float = 1.0

    def __post_init__(self):
        self.center = np.atleast_1d(np.asarray(self.center, dtype=np.float64))
        if self.radius <= 0.0:
            raise DomainError("bump radius must be positive")
        if self.height < 0.0:
            raise DomainError("bump height must be nonnegative")

    @property
    def d(self) -> int:
        return self.center.size

    @property
    def sup_norm(self) -> float:
        return self.height

    @property
    def support_radius(self) -> float:
        return self.radius

    @property
    def grad_norm(self) -> float:
        return self.height * CUT_GRAD_NORM / self.radius

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim <= 1 and self.d == 1:
            r = np.abs(x - self.center[0]) / self.radius
        else:
            pts = np.atleast_2d(x)
            r = np.linalg.norm(pts - self.center[None, :], axis=-1) / self.radius
        out = self.height * (1.0 - smoothstep(r))
        return out if np.ndim(x) else float(out)

    def on_grid(self, nodes: np.ndarray) -> np.ndarray:
        """Values on a 1D grid (d must be 1)."""
        if self.d != 1:
            raise DomainError("on_grid requires a one-dimensional bump")
        return self(np.asarray(nodes, dtype=np.float64))

    def to_json(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "radius": self.radius,
            "height": self.height,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Bump":
        return cls(
            center=np.asarray(doc.get("center", [0.0]), dtype=np.float64),
            radius=float(doc.get("radius", 1.0)),
            height=float(doc.get("height", 1.0)),
        )
