import warnings
from dataclasses import replace
from multiprocessing.pool import ThreadPool
from typing import Literal

import numpy as np

from micro_reynolds.errors import (
    DegenerateDenominator,
    DomainError,
    EllipticityError,
    RangeError,
    RegimeWarning,
)
from micro_reynolds.model.params import FluidParams, gamma_alpha, wave_number
from micro_reynolds.model.roughness import RoughnessProfile
from micro_reynolds.model.samples import (
    CoefficientConstants,
    CoefficientField,
    CoefficientSample,
    ProfileSample,
    perp,
)

# k h above this leaves the closed forms to the boundary-value oracle.
REGIME_LIMIT = 30.0
# |L-denominator| below this is treated as degenerate.
DENOMINATOR_FLOOR = 1e-14

Phi2Variant = Literal["A1", "A2"]
PHI2_VARIANTS = ("A1", "A2")


def _as_thickness(h_val) -> np.ndarray:
    h = np.asarray(h_val, dtype=float)
    if not np.all(np.isfinite(h)) or np.any(h <= 0):
        bad = h[~(np.isfinite(h) & (h > 0))].flat[0]
        raise RangeError("h", float(bad), "must be positive and finite")
    return h


def _unwrap(x: np.ndarray):
    # scalar in, scalar out
    return float(x) if np.ndim(x) == 0 else x


def coef_constants(h_val, params: FluidParams) -> CoefficientConstants:
    """Evaluate the constants of the closed-form z3-profiles.
    Args:
        h_val: film thickness, scalar or array.
        params: validated fluid parameters.
    Returns:
        (L, A1, A2, B1, B2), the primed constants on the alpha = 1 branch.
    Raises:
        DegenerateDenominator: if |L-denominator| < 1e-14.
    """
    h = _as_thickness(h_val)
    N2, lam = params.N2, params.Rc / params.beta
    k = wave_number(params)
    if np.any(k * h > REGIME_LIMIT):
        warnings.warn(
            RegimeWarning(f"k*h={float(np.max(k * h))!r} exceeds {REGIME_LIMIT}, hyperbolic terms may overflow"),
            stacklevel=2,
        )
    S, C = np.sinh(k * h), np.cosh(k * h)
    P = 0.5 / (1.0 - N2)
    D1 = 4 * N2**2 * (1 - C) + lam * k**2
    if params.unit_branch:
        den = D1 + 4 * N2 * k * h * S
        _check_denominator(den, h, "alpha=1")
        L = -1.0 / den
        A1 = L * (h * D1 - k * S * (lam - 2 * N2 * h**2))
        A2 = 4 * N2 * k * (1 - N2) * L * S
        B1 = k * L * P * (lam + 2 * N2 * h**2)
        B2 = -2 * N2 * k * L
    else:
        ga = gamma_alpha(params)
        g = ga / 2
        den = (g + C) * D1 + 2 * N2 * S * (ga * k * h + 2 * N2 * S)
        _check_denominator(den, h, "alpha!=1")
        L = -1.0 / den
        A1 = L * P * (h * D1 - k * S * (lam - 2 * N2 * h**2))
        A2 = 2 * N2 * k * L * S
        B1 = L * P * (
            k * (lam - 2 * N2 * h**2) * (C + g) + 2 * N2 * h * (2 * N2 * S + ga * k * h)
        )
        B2 = -2 * N2 * k * L * (g + C)
    return CoefficientConstants(*map(_unwrap, (L, A1, A2, B1, B2)))


def _check_denominator(den: np.ndarray, h: np.ndarray, branch: str):
    small = np.abs(den) < DENOMINATOR_FLOOR
    if np.any(small):
        i = np.argmax(small.ravel())
        raise DegenerateDenominator(float(den.flat[i]), float(h.flat[i]), branch)


def _closed_theta_phi(
    h: np.ndarray, params: FluidParams, phi2_variant: Phi2Variant
) -> tuple[np.ndarray, ...]:
    _, A1, A2, B1, B2 = coef_constants(h, params)
    N2, k = params.N2, wave_number(params)
    S, C = np.sinh(k * h), np.cosh(k * h)
    P = 0.5 / (1.0 - N2)
    # z3-integrals of the hyperbolic brackets of the velocity profile
    I_c = (2 * N2 / k) * (S / k - h * C)
    J_b = (C - 1) / k
    if params.unit_branch:
        theta1 = 2 * P * h**3 / 3 + P * h**2 * A1 - I_c * B1
        theta2 = -P * h**2 * A2 + I_c * B2
        phi1 = P * h**2 / 2 + P * h * A1 + J_b * B1
        # both printed forms coincide on this branch
        phi2 = P * h * A2 + J_b * B2
        return theta1, theta2, phi1, phi2

    g = gamma_alpha(params) / 2
    I_s = (2 * N2 / k) * ((C - 1) / k - h * S) - g * h**2
    J_a = S / k + g * h
    theta1 = 2 * P * h**3 / 3 - I_s * A1 - I_c * B1
    theta2 = I_s * A2 + I_c * B2
    phi1 = P * h**2 / 2 + J_a * A1 + J_b * B1
    match phi2_variant:
        case "A2":
            phi2 = J_a * A2 + J_b * B2
        case "A1":
            phi2 = (S / k - g * h) * A1 + J_b * B2
        case _:
            raise RangeError("phi2_variant", float("nan"), f"must be one of {PHI2_VARIANTS}")
    return theta1, theta2, phi1, phi2


def theta_phi(
    h_val, params: FluidParams, phi2_variant: Phi2Variant = "A2"
) -> CoefficientSample:
    """Evaluate the z3-averaged coefficients Theta_1, Theta_2, Phi_1, Phi_2.
    Args:
        h_val: film thickness, scalar or array.
        params: validated fluid parameters.
        phi2_variant: which form of Phi_2 on the alpha != 1 branch, `A2` is the oracle-consistent one.
    Returns:
        coefficients of the same shape as `h_val`.
    Raises:
        DegenerateDenominator: if the L-denominator vanishes.
        EllipticityError: if Theta_1 is not positive.
    """
    h = _as_thickness(h_val)
    wide = wave_number(params) * h > REGIME_LIMIT
    if not np.any(wide):
        values = _closed_theta_phi(h, params, phi2_variant)
    else:
        # deferred, the oracle package imports this module
        from micro_reynolds.oracle.bvp import oracle_coefficients

        warnings.warn(
            RegimeWarning(
                f"{int(wide.sum())} thickness value(s) with k*h > {REGIME_LIMIT}, "
                "falling back to the boundary-value oracle"
            ),
            stacklevel=2,
        )
        values = tuple(np.empty(h.shape) for _ in range(4))
        if np.any(~wide):
            for out, closed in zip(values, _closed_theta_phi(h[~wide], params, phi2_variant)):
                out[~wide] = closed
        for idx in filter(lambda idx: wide[idx], np.ndindex(h.shape)):
            for out, oracle in zip(values, oracle_coefficients(float(h[idx]), params).astuple()):
                out[idx] = oracle

    theta1 = np.asarray(values[0])
    nonpositive = ~(theta1 > 0)
    if np.any(nonpositive):
        i = np.argmax(nonpositive.ravel())
        raise EllipticityError(
            float(theta1.flat[i]), float(h.flat[i]), count=int(nonpositive.sum())
        )
    return CoefficientSample(*map(_unwrap, values))


def profile(
    z3,
    h_val: float,
    params: FluidParams,
    G: tuple[float, float],
    s: tuple[float, float] | None = None,
) -> ProfileSample:
    """Evaluate the closed-form velocity and microrotation profiles.
    Args:
        z3: vertical coordinates in [0, h], scalar or array.
        h_val: film thickness at the frozen z'.
        params: validated fluid parameters.
        G: in-plane pressure gradient load.
        s: wall velocity, `params.s` if not provided.
    Returns:
        u, w of shape [*z3.shape, 2].
    Raises:
        DomainError: if z3 leaves [0, h].
    """
    h = float(_as_thickness(h_val))
    z = np.asarray(z3, dtype=float)
    if np.any(z < 0) or np.any(z > h):
        bad = z[(z < 0) | (z > h)].flat[0]
        raise DomainError("z3", float(bad), 0.0, h)
    G = np.asarray(G, dtype=float)
    s = np.asarray(params.s if s is None else s, dtype=float)

    _, A1, A2, B1, B2 = coef_constants(h, params)
    N2, k = params.N2, wave_number(params)
    P = 0.5 / (1.0 - N2)
    c = 2 * N2 / k
    # sinh(kz) - sinh(kh) and cosh(kz) - cosh(kh) in product form, exactly zero at z3 = h
    half = np.sinh(k * (z - h) / 2)
    dS = 2 * np.cosh(k * (z + h) / 2) * half
    dC = 2 * np.sinh(k * (z + h) / 2) * half
    if params.unit_branch:
        fu = c * B1 * dC + (z**2 - h**2) * P + 2 * P * A1 * (z - h)
        gu = c * B2 * dC + 2 * P * A2 * (z - h)
        fw = B1 * dS + P * (z - h)
        gw = B2 * dS
    else:
        ga = gamma_alpha(params)
        fu = c * (A1 * dS + B1 * dC) + ga * A1 * (z - h) + (z**2 - h**2) * P
        gu = c * (A2 * dS + B2 * dC) + ga * A2 * (z - h)
        fw = A1 * dC + B1 * dS + P * (z - h)
        gw = A2 * dC + B2 * dS
    fu, gu, fw, gw = map(np.asarray, (fu, gu, fw, gw))

    u = fu[..., None] * G + gu[..., None] * s
    w = fw[..., None] * perp(G) + gw[..., None] * perp(s)
    return ProfileSample(u=u, w=w)


def evaluate_field(
    points: np.ndarray,
    h: np.ndarray,
    params: FluidParams,
    phi2_variant: Phi2Variant = "A2",
    threads: int = 1,
) -> CoefficientField:
    """Evaluate the coefficients over a set of cell points, block by block.
    Args:
        points: coordinates of the samples, [..., 2].
        h: film thickness at the points, [...].
        params: validated fluid parameters.
        phi2_variant: form of Phi_2.
        threads: the number of worker threads.
    Returns:
        the coefficient field.
    Raises:
        DegenerateDenominator, EllipticityError: with the offending z' attached.
    """
    values = [np.empty(h.shape) for _ in range(4)]

    def _block(i: int) -> DegenerateDenominator | EllipticityError | None:
        # fixed blocks along the leading axis, results do not depend on the scheduling
        try:
            sample = theta_phi(h[i], params, phi2_variant)
        except (DegenerateDenominator, EllipticityError) as err:
            return err
        for out, value in zip(values, sample.astuple()):
            out[i] = value
        return None

    blocks = range(h.shape[0])
    if threads <= 1:
        errors = [_block(i) for i in blocks]
    else:
        with ThreadPool(threads) as pool:
            errors = pool.map(_block, blocks)

    # the lowest failing block is reported whatever the thread count
    for i, err in enumerate(errors):
        if err is None:
            continue
        idx = (i, *np.argwhere(h[i] == err.h)[0])
        z1, z2 = points[idx]
        raise replace(err, location=(float(z1), float(z2))) from err

    return CoefficientField(points, h, *values, phi2_variant=phi2_variant)


def sample_field(
    profile: RoughnessProfile,
    params: FluidParams,
    n: int,
    threads: int = 1,
    phi2_variant: Phi2Variant = "A2",
) -> CoefficientField:
    """Sample the coefficients on the n x n node-centered cell grid.
    Args:
        profile: the roughness profile.
        params: validated fluid parameters.
        n: the number of nodes per direction, at least 4.
        threads: the number of worker threads.
        phi2_variant: form of Phi_2.
    Returns:
        coefficient field of shape [n, n], indexed [i2, i1].
    """
    if n < 4:
        raise RangeError("n", n, "must be at least 4")
    z1, z2, h = profile.grid(n)
    return evaluate_field(np.stack([z1, z2], axis=-1), h, params, phi2_variant, threads)
