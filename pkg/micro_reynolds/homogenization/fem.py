import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, gmres, spsolve

from micro_reynolds.errors import RangeError, SolverError


class QuadratureBilinear2D:
    """2x2 Gauss rule on the reference square [-1, 1]^2."""

    def __init__(self):
        g = 1.0 / np.sqrt(3.0)
        # fmt: off
        self.pts = np.array([[-g, -g],
                             [ g, -g],
                             [ g,  g],
                             [-g,  g]])
        # fmt: on
        self.weights = np.ones(4)


class BasisBilinear2D:
    """Bilinear shape functions evaluated at the quadrature points."""

    def __init__(self, quadrature: QuadratureBilinear2D):
        self.quadrature = quadrature
        xi, eta = quadrature.pts[:, 0], quadrature.pts[:, 1]
        # [nquads, nnodes], counter-clockwise from (-1, -1)
        self.N = 0.25 * np.stack(
            [(1 - xi) * (1 - eta), (1 + xi) * (1 - eta), (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)],
            axis=-1,
        )
        # [nquads, nnodes, 2], derivatives w.r.t. (xi, eta)
        self.Nderiv = 0.25 * np.stack(
            [
                np.stack([-(1 - eta), -(1 - xi)], axis=-1),
                np.stack([(1 - eta), -(1 + xi)], axis=-1),
                np.stack([(1 + eta), (1 + xi)], axis=-1),
                np.stack([-(1 + eta), (1 - xi)], axis=-1),
            ],
            axis=1,
        )


@dataclass(frozen=True, eq=False)
class QuadMesh:
    """Uniform rectangular Q1 mesh, optionally periodic in both directions."""

    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)
    periodic: bool = False

    @cached_property
    def basis(self) -> BasisBilinear2D:
        return BasisBilinear2D(QuadratureBilinear2D())

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def node_shape(self) -> tuple[int, int]:
        """Nodal grid shape, [rows along x2, columns along x1]."""
        if self.periodic:
            return self.ny, self.nx
        return self.ny + 1, self.nx + 1

    @property
    def n_nodes(self) -> int:
        return self.node_shape[0] * self.node_shape[1]

    @property
    def n_elems(self) -> int:
        return self.nx * self.ny

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates [n_nodes, 2], x2 is the slow index."""
        rows, cols = self.node_shape
        x2, x1 = np.meshgrid(
            self.origin[1] + np.arange(rows) * self.hy,
            self.origin[0] + np.arange(cols) * self.hx,
            indexing="ij",
        )
        return np.stack([x1.ravel(), x2.ravel()], axis=-1)

    @cached_property
    def conn(self) -> np.ndarray:
        """Element connectivity [n_elems, 4], elements ordered with x2 slow."""
        rows, cols = self.node_shape
        e2, e1 = np.meshgrid(np.arange(self.ny), np.arange(self.nx), indexing="ij")
        e1, e2 = e1.ravel(), e2.ravel()
        # periodic identification wraps the last layer onto the first
        n1, n2 = (e1 + 1) % cols, (e2 + 1) % rows
        return np.stack(
            [e2 * cols + e1, e2 * cols + n1, n2 * cols + n1, n2 * cols + e1], axis=-1
        )

    @cached_property
    def qpoints(self) -> np.ndarray:
        """Physical quadrature points [n_elems, 4, 2]."""
        e2, e1 = np.meshgrid(np.arange(self.ny), np.arange(self.nx), indexing="ij")
        corner = np.stack(
            [self.origin[0] + e1.ravel() * self.hx, self.origin[1] + e2.ravel() * self.hy],
            axis=-1,
        )
        ref = 0.5 * (1 + self.basis.quadrature.pts) * np.array([self.hx, self.hy])
        return corner[:, None, :] + ref[None, :, :]

    @cached_property
    def grad(self) -> np.ndarray:
        """Physical shape-function gradients [nquads, nnodes, 2], identical on every element."""
        return self.basis.Nderiv * np.array([2.0 / self.hx, 2.0 / self.hy])

    @cached_property
    def wdet(self) -> np.ndarray:
        """Quadrature weights times the Jacobian determinant [nquads]."""
        return self.basis.quadrature.weights * (self.hx * self.hy / 4.0)


def stiffness(mesh: QuadMesh, coeff: np.ndarray) -> sp.csr_matrix:
    """Assemble the stiffness matrix of the form int (C grad phi_b) . grad phi_a.
    Args:
        mesh: the Q1 mesh.
        coeff: scalar coefficient at the quadrature points [n_elems, 4],
            a constant [2, 2] matrix or matrices at the quadrature points [n_elems, 4, 2, 2].
    Returns:
        [n_nodes, n_nodes] sparse matrix, rows are test functions.
    """
    coeff = np.asarray(coeff, dtype=float)
    G, wd = mesh.grad, mesh.wdet
    if coeff.shape == (2, 2):
        Ke = np.einsum("q,qai,ij,qbj->ab", wd, G, coeff, G)
        Ke = np.broadcast_to(Ke, (mesh.n_elems, 4, 4))
    elif coeff.ndim == 2:
        Ke = np.einsum("q,eq,qai,qbi->eab", wd, coeff, G, G)
    else:
        Ke = np.einsum("q,qai,eqij,qbj->eab", wd, G, coeff, G)
    conn = mesh.conn
    rows = np.broadcast_to(conn[:, :, None], Ke.shape)
    cols = np.broadcast_to(conn[:, None, :], Ke.shape)
    # duplicates are summed in index order
    return sp.coo_matrix(
        (Ke.ravel(), (rows.ravel(), cols.ravel())), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()


def _scatter(mesh: QuadMesh, local: np.ndarray) -> np.ndarray:
    return np.bincount(mesh.conn.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def flux_load(mesh: QuadMesh, flux: np.ndarray) -> np.ndarray:
    """Assemble int flux . grad phi_a for a flux at the quadrature points [n_elems, 4, 2]."""
    local = np.einsum("q,eqi,qai->ea", mesh.wdet, flux, mesh.grad)
    return _scatter(mesh, local)


def mass_vector(mesh: QuadMesh) -> np.ndarray:
    """int phi_a, the lumped mass and the weights of the mean constraint."""
    local = np.broadcast_to(np.einsum("q,qa->a", mesh.wdet, mesh.basis.N), (mesh.n_elems, 4))
    return _scatter(mesh, local)


def gradients(mesh: QuadMesh, nodal: np.ndarray) -> np.ndarray:
    """Gradients at the quadrature points of nodal fields.
    Args:
        nodal: [n_nodes] or [n_nodes, k].
    Returns:
        [n_elems, 4, 2] or [n_elems, 4, 2, k].
    """
    local = nodal[mesh.conn]
    if local.ndim == 2:
        return np.einsum("qai,ea->eqi", mesh.grad, local)
    return np.einsum("qai,eak->eqik", mesh.grad, local)


def integrate(mesh: QuadMesh, values: np.ndarray) -> np.ndarray:
    """Integrate values given at the quadrature points [n_elems, 4, ...]."""
    return np.tensordot(mesh.wdet, values.sum(axis=0), axes=(0, 0))


def project(mesh: QuadMesh, values: np.ndarray) -> np.ndarray:
    """Lumped L2 projection of quadrature values [n_elems, 4, ...] onto the nodes."""
    mass = mass_vector(mesh)
    trailing = values.shape[2:]
    flat = values.reshape(mesh.n_elems, 4, -1)
    out = np.stack(
        [
            _scatter(mesh, np.einsum("q,qa,eq->ea", mesh.wdet, mesh.basis.N, flat[..., c])) / mass
            for c in range(flat.shape[-1])
        ],
        axis=-1,
    )
    return out.reshape(mesh.n_nodes, *trailing)


@dataclass(frozen=True, eq=False)
class MeanZeroSolution:
    x: np.ndarray
    multiplier: float
    # relative max-norm residual of the solved system
    residual: float


def _relative_residual(r: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.abs(rhs).max()
    return float(np.abs(r).max() / (scale if scale > 0 else 1.0))


def solve_mean_zero(
    K: sp.spmatrix,
    F: np.ndarray,
    mass: np.ndarray,
    method: Literal["direct", "gmres"] = "direct",
    rtol: float = 1e-12,
) -> MeanZeroSolution:
    """Solve K x = F on the complement of the constants, mass . x = 0.
    Args:
        K: symmetric positive semi-definite matrix with the constants as kernel.
        F: right-hand side orthogonal to the constants.
        mass: weights of the mean constraint.
        method: `direct` for sparse LU on the Lagrange-augmented system,
            `gmres` for Krylov on the singular system followed by the mean shift.
        rtol: relative tolerance of the Krylov method.
    Returns:
        the solution and its relative residual.
    Raises:
        SolverError: if the solve fails or does not converge.
    """
    match method:
        case "direct":
            A = sp.bmat([[K, mass[:, None]], [mass[None, :], None]], format="csc")
            rhs = np.append(F, 0.0)
            with warnings.catch_warnings():
                warnings.simplefilter("error", MatrixRankWarning)
                try:
                    sol = spsolve(A, rhs)
                except (MatrixRankWarning, RuntimeError) as e:
                    raise SolverError("spsolve", -1) from e
            if not np.all(np.isfinite(sol)):
                raise SolverError("spsolve", -1)
            residual = _relative_residual(A @ sol - rhs, rhs)
            return MeanZeroSolution(sol[:-1], float(sol[-1]), residual)
        case "gmres":
            n = K.shape[0]
            x, info = gmres(K, F, rtol=rtol, atol=0.0, restart=min(n, 50), maxiter=10 * n)
            residual = _relative_residual(K @ x - F, F)
            if info != 0 or not np.all(np.isfinite(x)):
                raise SolverError("gmres", int(info), residual)
            x = x - (mass @ x) / mass.sum()
            return MeanZeroSolution(x, 0.0, residual)
        case _:
            raise RangeError("solver", float("nan"), "must be one of ('direct', 'gmres')")
