from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from micro_reynolds.errors import RangeError


def cell_nodes(n: int) -> np.ndarray:
    """Node-centered coordinates -1/2 + i/n of the periodic unit cell."""
    return -0.5 + np.arange(n) / n


@dataclass(frozen=True, eq=False)
class RoughnessProfile:
    """Periodic film thickness h(z') on the unit cell Z' = (-1/2, 1/2)^2."""

    kind: Literal["constant", "cosine", "sampled"]
    # mean thickness of the constant and cosine family.
    h0: float = 1.0
    # cosine amplitudes (a1, a2).
    a: tuple[float, float] = (0.0, 0.0)
    # cosine phase shift in cell units.
    phase: tuple[float, float] = (0.0, 0.0)
    # nodal values of the sampled family, shape [n, n] indexed [i2, i1].
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "sampled":
            values = np.asarray(self.values, dtype=float)
            if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
                raise RangeError("values", float("nan"), "must be a square grid of n >= 2")
            object.__setattr__(self, "values", values)
        elif self.kind not in ("constant", "cosine"):
            raise RangeError("kind", float("nan"), f"unknown roughness family `{self.kind}`")
        if not np.isfinite(self.h_min) or self.h_min <= 0:
            raise RangeError("h_min", self.h_min, "must be positive")

    @classmethod
    def constant(cls, h0: float) -> "RoughnessProfile":
        return cls("constant", h0=h0)

    @classmethod
    def cosine(
        cls,
        h0: float,
        a: tuple[float, float],
        phase: tuple[float, float] = (0.0, 0.0),
    ) -> "RoughnessProfile":
        return cls("cosine", h0=h0, a=tuple(a), phase=tuple(phase))

    @classmethod
    def sampled(cls, values: np.ndarray) -> "RoughnessProfile":
        return cls("sampled", values=np.asarray(values, dtype=float))

    def __call__(self, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
        """Evaluate the thickness, vectorized over broadcastable coordinates."""
        z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=float), np.asarray(z2, dtype=float))
        match self.kind:
            case "constant":
                return np.full(z1.shape, float(self.h0))
            case "cosine":
                (a1, a2), (p1, p2) = self.a, self.phase
                return (
                    self.h0
                    + a1 * np.cos(2 * np.pi * (z1 + p1))
                    + a2 * np.cos(2 * np.pi * (z2 + p2))
                )
            case "sampled":
                return self._bilinear(z1, z2)

    def _bilinear(self, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
        # periodic wrap of the node-centered grid
        n = self.values.shape[0]
        t1, t2 = (z1 + 0.5) * n, (z2 + 0.5) * n
        f1, f2 = np.floor(t1), np.floor(t2)
        r1, r2 = t1 - f1, t2 - f2
        i1, i2 = f1.astype(int) % n, f2.astype(int) % n
        j1, j2 = (i1 + 1) % n, (i2 + 1) % n
        v = self.values
        return (
            (1 - r1) * (1 - r2) * v[i2, i1]
            + r1 * (1 - r2) * v[i2, j1]
            + r1 * r2 * v[j2, j1]
            + (1 - r1) * r2 * v[j2, i1]
        )

    @cached_property
    def h_min(self) -> float:
        match self.kind:
            case "constant":
                return float(self.h0)
            case "cosine":
                return float(self.h0 - abs(self.a[0]) - abs(self.a[1]))
            case _:
                # bilinear interpolants attain their extrema at the nodes
                return float(self.values.min())

    @cached_property
    def h_max(self) -> float:
        match self.kind:
            case "constant":
                return float(self.h0)
            case "cosine":
                return float(self.h0 + abs(self.a[0]) + abs(self.a[1]))
            case _:
                return float(self.values.max())

    def grid(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sample the thickness on the n x n node-centered grid.
        Args:
            n: the number of nodes per direction.
        Returns:
            z1, z2, h, each of shape [n, n] indexed [i2, i1] (z2 is the slow index).
        """
        z2, z1 = np.meshgrid(cell_nodes(n), cell_nodes(n), indexing="ij")
        return z1, z2, self(z1, z2)

    def transposed(self) -> "RoughnessProfile":
        """Swap the roles of z1 and z2."""
        match self.kind:
            case "cosine":
                return RoughnessProfile.cosine(self.h0, self.a[::-1], self.phase[::-1])
            case "sampled":
                return RoughnessProfile.sampled(self.values.T.copy())
            case _:
                return self
