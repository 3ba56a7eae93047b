from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class CoefficientConstants(NamedTuple):
    """Branch-appropriate constants (L, A1, A2, B1, B2) of the z3-profiles.
    On the alpha = 1 branch the slots hold the primed constants.
    """

    L: np.ndarray | float
    A1: np.ndarray | float
    A2: np.ndarray | float
    B1: np.ndarray | float
    B2: np.ndarray | float


@dataclass(frozen=True)
class CoefficientSample:
    """z3-averaged coefficients, scalars or arrays of a common shape."""

    theta1: np.ndarray | float
    theta2: np.ndarray | float
    phi1: np.ndarray | float
    phi2: np.ndarray | float

    def astuple(self) -> tuple:
        return self.theta1, self.theta2, self.phi1, self.phi2


@dataclass(frozen=True)
class ProfileSample:
    """Velocity and microrotation profiles, shape [..., 2] each."""

    u: np.ndarray
    w: np.ndarray


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Coefficients sampled over the roughness cell.

    `points` carries the trailing coordinate axis, every other array shares its
    leading shape: [n, n] on the node grid or [n * n, 4] on the quadrature points.
    """

    points: np.ndarray
    h: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi2_variant: str = "A2"

    @property
    def sample(self) -> CoefficientSample:
        return CoefficientSample(self.theta1, self.theta2, self.phi1, self.phi2)


def perp(v: np.ndarray) -> np.ndarray:
    """In-plane rotation (v1, v2) -> (-v2, v1) over the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)
