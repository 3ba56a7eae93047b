import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import eigvalsh

from micro_reynolds.errors import AsymmetryWarning, IndefinitenessError, RangeError
from micro_reynolds.homogenization import fem
from micro_reynolds.homogenization.cell import FlowFactors
from micro_reynolds.homogenization.fem import QuadMesh
from micro_reynolds.logger import Logger
from micro_reynolds.model.params import FluidParams
from micro_reynolds.model.samples import perp

# K1 - K1^T above this is reported as asymmetric.
SYMMETRY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MacroDomain:
    """Rectangle (0, Lx) x (0, Ly) with an mx x my uniform grid."""

    Lx: float = 1.0
    Ly: float = 1.0
    mx: int = 32
    my: int = 32

    def __post_init__(self):
        for name in ("Lx", "Ly"):
            if not getattr(self, name) > 0:
                raise RangeError(name, getattr(self, name), "must be positive")
        for name in ("mx", "my"):
            if getattr(self, name) < 8:
                raise RangeError(name, getattr(self, name), "must be at least 8")

    @property
    def mesh(self) -> QuadMesh:
        return QuadMesh(self.mx, self.my, self.Lx, self.Ly)


@dataclass(frozen=True, eq=False)
class MacroSolution:
    """Zero-mean pressure with the averaged velocity and microrotation."""

    mesh: QuadMesh
    # nodal fields, [my + 1, mx + 1] and [my + 1, mx + 1, 2], x2 is the slow index
    p: np.ndarray
    U: np.ndarray
    W: np.ndarray
    # quadrature values [n_elems, 4, 2]
    grad_p: np.ndarray
    U_q: np.ndarray
    W_q: np.ndarray
    # relative residual of the linear solve
    residual: float
    factors: FlowFactors
    s: tuple[float, float]

    @property
    def x1(self) -> np.ndarray:
        return self.mesh.nodes[:, 0].reshape(self.mesh.node_shape)

    @property
    def x2(self) -> np.ndarray:
        return self.mesh.nodes[:, 1].reshape(self.mesh.node_shape)


def check_definiteness(K1: np.ndarray, logger: Logger | None = None) -> np.ndarray:
    """Check the symmetric part of K1 for positive definiteness.
    Returns:
        eigenvalues of the symmetric part.
    Raises:
        IndefinitenessError: if an eigenvalue is not positive.
    """
    eigvals = eigvalsh(0.5 * (K1 + K1.T))
    if np.any(eigvals <= 0):
        raise IndefinitenessError(tuple(float(e) for e in eigvals))
    defect = float(np.abs(K1 - K1.T).max())
    if defect > SYMMETRY_TOLERANCE:
        msg = f"K1 is not symmetric, |K1 - K1^T|_max={defect!r}, proceeding with the full matrix"
        warnings.warn(AsymmetryWarning(msg), stacklevel=2)
        if logger is not None:
            logger.log(msg)
    return eigvals


def reconstruct_fields(
    mesh: QuadMesh, p: np.ndarray, factors: FlowFactors, s: tuple[float, float]
) -> tuple[np.ndarray, ...]:
    """Averaged velocity and microrotation of a nodal pressure.
    Returns:
        grad p, U = -K1 grad p + L1 s and W = K2 (grad p)^perp + L2 s^perp at the quadrature points.
    """
    s = np.asarray(s, dtype=float)
    grad_p = fem.gradients(mesh, p)
    U = -grad_p @ factors.K1.T + factors.L1 * s
    W = perp(grad_p) @ factors.K2.T + factors.L2 * perp(s)
    return grad_p, U, W


def factors_load(mesh: QuadMesh, factors: FlowFactors, s: tuple[float, float]) -> np.ndarray:
    """Wall-driven load int L1 s . grad phi_a."""
    flux = np.broadcast_to(factors.L1 * np.asarray(s, dtype=float), (mesh.n_elems, 4, 2))
    return fem.flux_load(mesh, flux)


def solve_pressure(
    factors: FlowFactors,
    domain: MacroDomain,
    params: FluidParams,
    solver: Literal["direct", "gmres"] = "direct",
    tol: float = 1e-12,
    logger: Logger | None = None,
) -> MacroSolution:
    """Solve the generalized Reynolds equation
        int K1 grad p . grad v = int L1 s . grad v, for all v in H^1,
    with the natural flux condition and zero-mean pressure.
    Args:
        factors: homogenized flow factors.
        domain: the rectangle and its grid.
        params: fluid parameters, supplies the wall velocity.
        solver: `direct` or `gmres`.
        tol: relative tolerance of the Krylov solver.
        logger: optional logger.
    Returns:
        the pressure and the averaged fields.
    Raises:
        IndefinitenessError: if the symmetric part of K1 is not positive definite.
        SolverError: if the linear solve fails.
    """
    check_definiteness(factors.K1, logger)
    mesh = domain.mesh
    K = fem.stiffness(mesh, factors.K1)
    F = factors_load(mesh, factors, params.s)
    sol = fem.solve_mean_zero(K, F, fem.mass_vector(mesh), method=solver, rtol=tol)

    grad_p, U_q, W_q = reconstruct_fields(mesh, sol.x, factors, params.s)
    shape = mesh.node_shape
    if logger is not None:
        logger.log(f"reynolds: {domain.mx}x{domain.my}, solver={solver}, residual={sol.residual!r}")
    return MacroSolution(
        mesh=mesh,
        p=sol.x.reshape(shape),
        U=fem.project(mesh, U_q).reshape(*shape, 2),
        W=fem.project(mesh, W_q).reshape(*shape, 2),
        grad_p=grad_p,
        U_q=U_q,
        W_q=W_q,
        residual=sol.residual,
        factors=factors,
        s=tuple(params.s),
    )


def mass_residual(sol: MacroSolution, domain: MacroDomain) -> float:
    """Discrete mass conservation max_a |int U . grad phi_a|, relative to the wall-driven load.
    Args:
        sol: the solved pressure.
        domain: the rectangle and its grid.
    Returns:
        the normalized weak residual of div U = 0.
    """
    mesh = domain.mesh
    r = fem.flux_load(mesh, sol.U_q)
    wall = factors_load(mesh, sol.factors, sol.s)
    scale = np.abs(wall).max()
    return float(np.abs(r).max() / (scale if scale > 0 else 1.0))
