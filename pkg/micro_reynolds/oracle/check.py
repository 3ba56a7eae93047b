import itertools
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool

import numpy as np
from pydantic import BaseModel
from tqdm.auto import tqdm

from micro_reynolds.errors import ExistenceError, RangeError
from micro_reynolds.model.coefficients import PHI2_VARIANTS, Phi2Variant, profile, theta_phi
from micro_reynolds.model.params import FluidParams, validate
from micro_reynolds.oracle.bvp import BvpLoad, oracle_coefficients, solve_bvp

# denominator floor of the relative errors, coefficients below it compare absolutely.
RELATIVE_FLOOR = 1e-9


def relative_error(closed, oracle) -> np.ndarray:
    closed, oracle = np.asarray(closed, dtype=float), np.asarray(oracle, dtype=float)
    return np.abs(closed - oracle) / np.maximum(np.abs(oracle), RELATIVE_FLOOR)


def oracle_profile_check(
    h_val: float,
    params: FluidParams,
    load: BvpLoad,
    M: int = 2048,
    richardson: bool = True,
) -> float:
    """Compare the oracle profiles against the closed forms node by node.
    Args:
        h_val: film thickness.
        params: validated fluid parameters.
        load: pressure gradient and wall velocity.
        M: the number of intervals.
        richardson: extrapolate the nodal values with the half-resolution solve.
    Returns:
        max over nodes of |u_oracle - u_closed| + |w_oracle - w_closed|.
    """
    if richardson:
        M = M + (-M) % 4
        fine = solve_bvp(h_val, params, load, M)
        coarse = solve_bvp(h_val, params, load, M // 2)
        grid = coarse.grid
        u = (4 * fine.u[::2] - coarse.u) / 3
        w = (4 * fine.w[::2] - coarse.w) / 3
    else:
        sol = solve_bvp(h_val, params, load, M)
        grid, u, w = sol.grid, sol.u, sol.w
    closed = profile(grid, h_val, params, load.G, load.s)
    discrepancy = np.linalg.norm(u - closed.u, axis=-1) + np.linalg.norm(w - closed.w, axis=-1)
    return float(discrepancy.max())


def default_sweep(Rc: float = 1.0) -> list[tuple[FluidParams, float]]:
    """Admissible points of the reference sweep over N^2, alpha, beta and h."""
    points = []
    for N2, alpha, beta, h in itertools.product(
        (0.1, 0.25, 0.5, 0.8), (0.5, 1.0, 2.0), (0.5, 1.0, 2.0), (0.5, 1.0, 2.0)
    ):
        params = FluidParams(N2=N2, Rc=Rc, alpha=alpha, beta=beta)
        try:
            validate(params, h)
        except (RangeError, ExistenceError):
            continue
        points.append((params, h))
    return points


class SweepRecord(BaseModel):
    """Closed-form against oracle comparison at a single parameter point."""

    N2: float
    Rc: float
    alpha: float
    beta: float
    h: float
    closed: list[float]
    oracle: list[float]
    relative_error: list[float]
    max_relative_error: float
    profile_discrepancy: float


def _compare(
    point: tuple[FluidParams, float],
    M: int,
    phi2_variant: Phi2Variant,
    richardson: bool,
) -> SweepRecord:
    params, h = point
    closed = theta_phi(h, params, phi2_variant).astuple()
    oracle = oracle_coefficients(h, params, M, richardson).astuple()
    errors = relative_error(closed, oracle)
    discrepancy = max(
        oracle_profile_check(h, params, BvpLoad(G=(1.0, 0.0)), M, richardson),
        oracle_profile_check(h, params, BvpLoad(s=(1.0, 0.0)), M, richardson),
    )
    return SweepRecord(
        N2=params.N2,
        Rc=params.Rc,
        alpha=params.alpha,
        beta=params.beta,
        h=h,
        closed=list(closed),
        oracle=list(oracle),
        relative_error=errors.tolist(),
        max_relative_error=float(errors.max()),
        profile_discrepancy=discrepancy,
    )


def oracle_sweep(
    points: list[tuple[FluidParams, float]],
    M: int = 2048,
    phi2_variant: Phi2Variant = "A2",
    richardson: bool = True,
    threads: int = 1,
    verbose: bool = False,
) -> list[SweepRecord]:
    """Compare closed forms and oracle over the given parameter points.
    Args:
        points: pairs of validated parameters and film thickness.
        M: the number of oracle intervals.
        phi2_variant: form of Phi_2 under test.
        richardson: whether to extrapolate the oracle.
        threads: the number of worker threads.
        verbose: whether to show the progress bar.
    Returns:
        one record per point, in the given order.
    """
    compare = lambda point: _compare(point, M, phi2_variant, richardson)
    if threads <= 1:
        iter_ = map(compare, points)
        if verbose:
            iter_ = tqdm(iter_, total=len(points))
        return list(iter_)
    with ThreadPool(threads) as pool:
        iter_ = pool.imap(compare, points)
        if verbose:
            iter_ = tqdm(iter_, total=len(points))
        return list(iter_)


@dataclass(frozen=True)
class Phi2Adjudication:
    """Which printed form of Phi_2 reproduces the oracle."""

    # None if neither variant matches.
    selected: str | None
    max_error: dict[str, float]
    points: int
    # both variants matched at every point
    degenerate: bool = False


def adjudicate_phi2(
    points: list[tuple[FluidParams, float]],
    M: int = 2048,
    tolerance: float = 1e-6,
    richardson: bool = True,
) -> Phi2Adjudication:
    """Evaluate both forms of Phi_2 against the oracle.
    Args:
        points: pairs of validated parameters and film thickness, alpha = 1 points are skipped.
        M: the number of oracle intervals.
        tolerance: the relative error under which a variant matches.
        richardson: whether to extrapolate the oracle.
    Returns:
        the adjudication, `A2` preferred when both forms match.
    """
    points = [(params, h) for params, h in points if not params.unit_branch]
    max_error = {variant: 0.0 for variant in PHI2_VARIANTS}
    for params, h in points:
        reference = oracle_coefficients(h, params, M, richardson).phi2
        for variant in PHI2_VARIANTS:
            closed = theta_phi(h, params, variant).phi2
            max_error[variant] = max(max_error[variant], float(relative_error(closed, reference)))

    matches = [variant for variant in PHI2_VARIANTS if max_error[variant] <= tolerance]
    match matches:
        case [variant]:
            return Phi2Adjudication(variant, max_error, len(points))
        case ["A1", "A2"]:
            return Phi2Adjudication("A2", max_error, len(points), degenerate=True)
        case _:
            return Phi2Adjudication(None, max_error, len(points))


def observed_order(coarse, medium, fine) -> np.ndarray:
    """Convergence order of a sequence under grid doubling, log2 |f_h - f_h/2| / |f_h/2 - f_h/4|."""
    coarse, medium, fine = (np.asarray(x, dtype=float) for x in (coarse, medium, fine))
    return np.log2(np.abs(coarse - medium) / np.abs(medium - fine))
