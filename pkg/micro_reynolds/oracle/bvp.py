import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from micro_reynolds.errors import RangeError, SingularSystem
from micro_reynolds.model.params import FluidParams
from micro_reynolds.model.samples import CoefficientSample

# relative residual above which the factorization is considered failed.
RESIDUAL_LIMIT = 1e-10

# unknown layout, interleaved per node
U1, U2, W1, W2 = range(4)


@dataclass(frozen=True)
class BvpLoad:
    """Constant in-plane load of the z3 boundary-value problem."""

    # pressure gradient, stands for the macro plus micro pressure gradients at a frozen z'.
    G: tuple[float, float] = (0.0, 0.0)
    # wall velocity.
    s: tuple[float, float] = (0.0, 0.0)

    def __add__(self, other: "BvpLoad") -> "BvpLoad":
        return BvpLoad(
            G=(self.G[0] + other.G[0], self.G[1] + other.G[1]),
            s=(self.s[0] + other.s[0], self.s[1] + other.s[1]),
        )


@dataclass(frozen=True, eq=False)
class BvpSolution:
    """Nodal solution of the boundary-value problem on [0, h]."""

    grid: np.ndarray
    # [M + 1, 2]
    u: np.ndarray
    w: np.ndarray
    # z3-integrals of u and w, [2]
    U: np.ndarray
    W: np.ndarray
    residual: float


def _even(M: int) -> int:
    return M + (M % 2)


def assemble(h_val: float, params: FluidParams, load: BvpLoad, M: int) -> tuple[sp.csr_matrix, np.ndarray]:
    """Assemble the finite-difference system of the coupled four-component problem.
    Args:
        h_val: film thickness.
        params: fluid parameters.
        load: constant pressure gradient and wall velocity.
        M: the number of intervals.
    Returns:
        sparse matrix and right-hand side over the unknowns 4j + c, c in (u1, u2, w1, w2), for
        the nodes j < M. The rough-surface values are zero and carry no unknowns.
    """
    N2, Rc, alpha, beta = params.N2, params.Rc, params.alpha, params.beta
    (G1, G2), (s1, s2) = load.G, load.s
    dz = h_val / M
    d2, d1 = 1.0 / dz**2, 1.0 / (2 * dz)
    rows, cols, vals = [], [], []
    size = 4 * M

    def _put(r, c, v):
        r, c = np.broadcast_arrays(r, c)
        v = np.broadcast_to(v, r.shape).astype(float)
        # columns of the node M vanish, u = w = 0 at the rough surface
        keep = c < size
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(v[keep])

    idx = lambda j, c: 4 * j + c
    b = np.zeros(size)

    # interior, centered differences
    j = np.arange(1, M)
    for c, diff in ((U1, 1.0), (U2, 1.0), (W1, Rc), (W2, Rc)):
        _put(idx(j, c), idx(j - 1, c), -diff * d2)
        _put(idx(j, c), idx(j, c), 2 * diff * d2)
        _put(idx(j, c), idx(j + 1, c), -diff * d2)
    # -u1'' + 2N^2 w2' = -G1, -u2'' - 2N^2 w1' = -G2
    for c, other, sign, rhs in ((U1, W2, 1.0, -G1), (U2, W1, -1.0, -G2)):
        _put(idx(j, c), idx(j + 1, other), sign * 2 * N2 * d1)
        _put(idx(j, c), idx(j - 1, other), -sign * 2 * N2 * d1)
        b[idx(j, c)] = rhs
    # -Rc w1'' + 4N^2 w1 + 2N^2 u2' = 0, -Rc w2'' + 4N^2 w2 - 2N^2 u1' = 0
    for c, other, sign in ((W1, U2, 1.0), (W2, U1, -1.0)):
        _put(idx(j, c), idx(j, c), 4 * N2)
        _put(idx(j, c), idx(j + 1, other), sign * 2 * N2 * d1)
        _put(idx(j, c), idx(j - 1, other), -sign * 2 * N2 * d1)

    # flat wall, one-sided second-order differences
    one_sided = np.array([-3.0, 4.0, -1.0]) * d1
    for c, scale in ((U1, 1.0), (U2, 1.0), (W1, Rc), (W2, Rc)):
        _put(idx(0, c), idx(np.arange(3), c), scale * one_sided)
    # u' = -(2/alpha) w^perp
    _put(idx(0, U1), idx(0, W2), -2.0 / alpha)
    _put(idx(0, U2), idx(0, W1), 2.0 / alpha)
    # Rc w' = -2N^2 beta (u - s)^perp
    _put(idx(0, W1), idx(0, U2), -2 * N2 * beta)
    b[idx(0, W1)] = -2 * N2 * beta * s2
    _put(idx(0, W2), idx(0, U1), 2 * N2 * beta)
    b[idx(0, W2)] = 2 * N2 * beta * s1

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    return A, b


def solve_bvp(h_val: float, params: FluidParams, load: BvpLoad, M: int = 2048) -> BvpSolution:
    """Solve the z3 boundary-value problem by second-order finite differences.
    Args:
        h_val: film thickness.
        params: validated fluid parameters.
        load: constant pressure gradient and wall velocity.
        M: the number of intervals, rounded up to even for the Simpson averages.
    Returns:
        nodal profiles and their z3-integrals.
    Raises:
        SingularSystem: if the sparse factorization fails.
    """
    if M < 16:
        raise RangeError("M", M, "must be at least 16")
    if not h_val > 0:
        raise RangeError("h", h_val, "must be positive")
    M = _even(M)
    A, b = assemble(h_val, params, load, M)
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            x = spsolve(A.tocsc(), b)
        except (MatrixRankWarning, RuntimeError) as e:
            raise SingularSystem(str(e)) from e
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite solution")

    scale = abs(A).sum(axis=1).max() * np.abs(x).max() + np.abs(b).max()
    residual = 0.0 if scale == 0 else float(np.abs(A @ x - b).max() / scale)
    if residual > RESIDUAL_LIMIT:
        raise SingularSystem("residual above limit", residual)

    # no-slip at the rough surface
    x = np.append(x, np.zeros(4)).reshape(M + 1, 4)
    grid = np.linspace(0.0, h_val, M + 1)
    u, w = x[:, [U1, U2]], x[:, [W1, W2]]
    return BvpSolution(
        grid=grid,
        u=u,
        w=w,
        U=simpson(u, x=grid, axis=0),
        W=simpson(w, x=grid, axis=0),
        residual=residual,
    )


def _unit_responses(h_val: float, params: FluidParams, M: int) -> np.ndarray:
    pressure = solve_bvp(h_val, params, BvpLoad(G=(1.0, 0.0)), M)
    wall = solve_bvp(h_val, params, BvpLoad(s=(1.0, 0.0)), M)
    # (e1)^perp = (0, 1)
    return np.array([-pressure.U[0], wall.U[0], pressure.W[1], wall.W[1]])


def oracle_coefficients(
    h_val: float, params: FluidParams, M: int = 2048, richardson: bool = True
) -> CoefficientSample:
    """Extract the averaged coefficients from unit-load responses.
    Args:
        h_val: film thickness.
        params: validated fluid parameters.
        M: the number of intervals.
        richardson: combine with the half-resolution solve, (4 f_M - f_{M/2}) / 3.
    Returns:
        Theta_1, Theta_2, Phi_1, Phi_2.
    """
    if not richardson:
        return CoefficientSample(*map(float, _unit_responses(h_val, params, M)))
    # both resolutions must stay even
    M = M + (-M) % 4
    fine = _unit_responses(h_val, params, M)
    coarse = _unit_responses(h_val, params, M // 2)
    return CoefficientSample(*map(float, (4 * fine - coarse) / 3))
