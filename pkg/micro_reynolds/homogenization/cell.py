from dataclasses import dataclass, field

import numpy as np

from micro_reynolds.errors import EllipticityError, RangeError
from micro_reynolds.homogenization import fem
from micro_reynolds.homogenization.fem import QuadMesh
from micro_reynolds.logger import Logger
from micro_reynolds.model.coefficients import Phi2Variant, evaluate_field
from micro_reynolds.model.params import FluidParams
from micro_reynolds.model.roughness import RoughnessProfile
from micro_reynolds.model.samples import CoefficientField


def cell_mesh(n: int) -> QuadMesh:
    """Periodic n x n mesh of the unit cell (-1/2, 1/2)^2."""
    if n < 8:
        raise RangeError("n", n, "must be at least 8")
    return QuadMesh(n, n, 1.0, 1.0, origin=(-0.5, -0.5), periodic=True)


def sample_quadrature(
    profile: RoughnessProfile,
    params: FluidParams,
    n: int,
    threads: int = 1,
    phi2_variant: Phi2Variant = "A2",
) -> CoefficientField:
    """Sample the coefficients at the 2x2 Gauss points of the periodic cell mesh.
    Returns:
        coefficient field of shape [n * n, 4].
    """
    mesh = cell_mesh(n)
    # [n, n * 4] blocks, one per element row
    points = mesh.qpoints.reshape(n, n * 4, 2)
    h = profile(points[..., 0], points[..., 1])
    sampled = evaluate_field(points, h, params, phi2_variant, threads)
    shape = (n * n, 4)
    return CoefficientField(
        mesh.qpoints,
        sampled.h.reshape(shape),
        sampled.theta1.reshape(shape),
        sampled.theta2.reshape(shape),
        sampled.phi1.reshape(shape),
        sampled.phi2.reshape(shape),
        phi2_variant=phi2_variant,
    )


@dataclass(frozen=True, eq=False)
class CellSolution:
    """Periodic correctors q^1, q^2 of the local problem."""

    n: int
    mesh: QuadMesh
    # nodal values [n, n] indexed [i2, i1], zero mean
    q1: np.ndarray
    q2: np.ndarray
    # [n_elems, 4, 2 (derivative direction r), 2 (corrector c)], d_r q^c
    grad_q: np.ndarray
    # relative residual of the two solves
    residual: float
    # cell means of the correctors
    mean: tuple[float, float] = field(default=(0.0, 0.0))


def solve_correctors(
    coeff_field: CoefficientField,
    params: FluidParams,
    n: int,
    method: str = "direct",
    logger: Logger | None = None,
) -> CellSolution:
    """Solve the periodic local problems
        int Theta_1 (grad q^i + e_i) . grad v = int Theta_2 s_i d_i v, for all periodic v.
    Args:
        coeff_field: coefficients at the quadrature points of the n x n cell mesh.
        params: fluid parameters, the wall velocity enters the right-hand side.
        n: the number of elements per direction.
        method: linear solver, `direct` or `gmres`.
        logger: optional logger.
    Returns:
        the correctors with zero cell mean.
    Raises:
        EllipticityError: if Theta_1 is not positive at a quadrature point.
        SolverError: if the linear solve fails.
    """
    mesh = cell_mesh(n)
    theta1, theta2 = coeff_field.theta1, coeff_field.theta2
    if theta1.shape != (mesh.n_elems, 4):
        raise RangeError("coeff_field", float(theta1.size), f"must be sampled on the {n}x{n} quadrature grid")
    nonpositive = ~(theta1 > 0)
    if np.any(nonpositive):
        i = np.argmax(nonpositive.ravel())
        z1, z2 = coeff_field.points.reshape(-1, 2)[i]
        raise EllipticityError(
            float(theta1.flat[i]),
            float(coeff_field.h.flat[i]),
            count=int(nonpositive.sum()),
            location=(float(z1), float(z2)),
        )

    K = fem.stiffness(mesh, theta1)
    mass = fem.mass_vector(mesh)
    correctors, residual = [], 0.0
    for i in range(2):
        flux = np.zeros((mesh.n_elems, 4, 2))
        flux[..., i] = theta2 * params.s[i] - theta1
        sol = fem.solve_mean_zero(K, fem.flux_load(mesh, flux), mass, method)
        correctors.append(sol.x)
        residual = max(residual, sol.residual)

    q = np.stack(correctors, axis=-1)
    mean = tuple(float(m) for m in mass @ q / mass.sum())
    if logger is not None:
        logger.log(f"cell: n={n}, residual={residual!r}, mean={mean}")
    return CellSolution(
        n=n,
        mesh=mesh,
        q1=q[:, 0].reshape(n, n),
        q2=q[:, 1].reshape(n, n),
        grad_q=fem.gradients(mesh, q),
        residual=residual,
        mean=mean,
    )


@dataclass(frozen=True, eq=False)
class FlowFactors:
    """Homogenized flow factors of the Reynolds equation."""

    K1: np.ndarray
    L1: float
    K2: np.ndarray
    L2: float

    @property
    def symmetry_defect(self) -> float:
        return float(np.abs(self.K1 - self.K1.T).max())

    @classmethod
    def constant(cls, theta1: float, theta2: float, phi1: float, phi2: float) -> "FlowFactors":
        """Flow factors of a flat film."""
        return cls(theta1 * np.eye(2), float(theta2), phi1 * np.eye(2), float(phi2))

    def to_dict(self) -> dict:
        return {
            "K1": self.K1.ravel().tolist(),
            "L1": float(self.L1),
            "K2": self.K2.ravel().tolist(),
            "L2": float(self.L2),
            "symmetry_defect": self.symmetry_defect,
        }


def flow_factors(cell: CellSolution, coeff_field: CoefficientField, params: FluidParams) -> FlowFactors:
    """Integrate the flow factors with the quadrature rule of the assembly.
    Args:
        cell: the correctors.
        coeff_field: the coefficients the correctors were solved with.
        params: fluid parameters.
    Returns:
        K1[r, c] = int Theta_1 (d_r q^c + delta_rc), L1 = int Theta_2,
        K2 = int Phi_1 [[d_2 q^2 + 1, -d_2 q^1], [-d_1 q^2, d_1 q^1 + 1]], L2 = int Phi_2.
    """
    mesh = cell.mesh
    # [n_elems, 4, r, c]
    D = cell.grad_q + np.eye(2)
    K1 = fem.integrate(mesh, coeff_field.theta1[..., None, None] * D)
    perp_arranged = np.stack(
        [
            np.stack([D[..., 1, 1], -D[..., 1, 0]], axis=-1),
            np.stack([-D[..., 0, 1], D[..., 0, 0]], axis=-1),
        ],
        axis=-2,
    )
    K2 = fem.integrate(mesh, coeff_field.phi1[..., None, None] * perp_arranged)
    return FlowFactors(
        K1=K1,
        L1=float(fem.integrate(mesh, coeff_field.theta2)),
        K2=K2,
        L2=float(fem.integrate(mesh, coeff_field.phi2)),
    )


def laminate_bounds(coeff_field: CoefficientField, mesh: QuadMesh) -> tuple[float, float]:
    """Harmonic and arithmetic means of Theta_1 over the cell, by the assembly quadrature."""
    harmonic = 1.0 / fem.integrate(mesh, 1.0 / coeff_field.theta1)
    arithmetic = fem.integrate(mesh, coeff_field.theta1)
    return float(harmonic), float(arithmetic)
