import math
from dataclasses import dataclass, replace

from micro_reynolds.errors import BranchError, ExistenceError, RangeError

# |alpha - 1| below this routes every evaluation to the alpha = 1 formulas.
BRANCH_THRESHOLD = 1e-8


@dataclass(frozen=True)
class FluidParams:
    """Dimensionless parameters of the micropolar thin-film model."""

    # coupling parameter squared, N^2 = nu_r / (nu + nu_r).
    N2: float
    # scaled microrotation viscosity.
    Rc: float
    # boundary-viscosity microrotation coefficient, 0 < alpha <= 1/N^2.
    alpha: float
    # slippage control coefficient.
    beta: float
    # surface velocity of the flat wall.
    s: tuple[float, float] = (0.0, 0.0)

    @property
    def N(self) -> float:
        return math.sqrt(self.N2)

    @property
    def gamma(self) -> float:
        """|1/alpha - N^2 - N^2 beta|, the slip-rotation mismatch of the existence condition."""
        return abs(1.0 / self.alpha - self.N2 - self.N2 * self.beta)

    @property
    def unit_branch(self) -> bool:
        """Whether the alpha = 1 formulas apply."""
        return abs(self.alpha - 1.0) <= BRANCH_THRESHOLD

    def with_s(self, s: tuple[float, float]) -> "FluidParams":
        return replace(self, s=(float(s[0]), float(s[1])))


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from the fluid parameters and the film thickness."""

    k: float
    # None on the alpha = 1 branch.
    gamma_alpha: float | None
    gamma2: float
    bound: float
    existence_margin: float
    h_max: float


def check_ranges(params: FluidParams):
    """Check the physical ranges of the parameters.
    Args:
        params: the fluid parameters.
    Raises:
        RangeError: if any parameter leaves its admissible range.
    """
    values = {name: getattr(params, name) for name in ("N2", "Rc", "alpha", "beta")}
    values.update({f"s{i + 1}": si for i, si in enumerate(params.s)})
    for name, value in values.items():
        if not math.isfinite(value):
            raise RangeError(name, value, "must be finite")
    if not 0.0 < params.N2 < 1.0:
        raise RangeError("N2", params.N2, "must lie in (0,1)")
    if params.Rc <= 0.0:
        raise RangeError("Rc", params.Rc, "must be positive")
    if params.beta <= 0.0:
        raise RangeError("beta", params.beta, "must be positive")
    # alpha = 1/N^2 exactly is admissible, allow for the rounding of the reciprocal
    if not 0.0 < params.alpha <= (1.0 / params.N2) * (1 + 1e-12):
        raise RangeError("alpha", params.alpha, "must lie in (0, 1/N2]")


def wave_number(params: FluidParams) -> float:
    """Profile wave number k = 2N sqrt((1 - N^2) / Rc)."""
    return 2.0 * params.N * math.sqrt((1.0 - params.N2) / params.Rc)


def gamma_alpha(params: FluidParams) -> float:
    """Boundary constant gamma_alpha = 2(1 - alpha N^2) / (alpha - 1).
    Args:
        params: the fluid parameters, alpha != 1.
    Returns:
        the boundary constant.
    Raises:
        BranchError: if alpha is within the branch threshold of 1.
    """
    if params.unit_branch:
        raise BranchError(params.alpha, BRANCH_THRESHOLD)
    return 2.0 * (1.0 - params.alpha * params.N2) / (params.alpha - 1.0)


def existence_bound(params: FluidParams, h_max: float) -> float:
    """Upper bound Rc / h_max^2 (1 - N^2) on gamma^2."""
    return params.Rc / h_max**2 * (1.0 - params.N2)


def _suggestions(params: FluidParams, h_max: float) -> list[str]:
    gamma = params.gamma
    suggestions = []
    if gamma > 0:
        h_limit = math.sqrt(params.Rc * (1.0 - params.N2)) / gamma
        suggestions.append(f"reduce h_max below {h_limit!r}")
        rc_limit = gamma**2 * h_max**2 / (1.0 - params.N2)
        suggestions.append(f"increase Rc above {rc_limit!r}")
    # gamma vanishes at alpha = 1 / (N^2 (1 + beta))
    alpha_star = 1.0 / (params.N2 * (1.0 + params.beta))
    suggestions.append(f"move alpha towards {alpha_star!r}")
    return suggestions


def validate(params: FluidParams, h_max: float) -> DerivedParams:
    """Gate the parameters on the ranges and the existence condition.
    Args:
        params: the fluid parameters.
        h_max: maximal film thickness over the roughness cell.
    Returns:
        derived parameters with a positive existence margin.
    Raises:
        RangeError: if a parameter or h_max is out of range.
        ExistenceError: if gamma^2 >= Rc / h_max^2 (1 - N^2).
    """
    check_ranges(params)
    if not (math.isfinite(h_max) and h_max > 0):
        raise RangeError("h_max", h_max, "must be positive")
    gamma2 = params.gamma**2
    bound = existence_bound(params, h_max)
    margin = bound - gamma2
    if margin <= 0:
        raise ExistenceError(gamma2, bound, h_max, _suggestions(params, h_max))
    return DerivedParams(
        k=wave_number(params),
        gamma_alpha=None if params.unit_branch else gamma_alpha(params),
        gamma2=gamma2,
        bound=bound,
        existence_margin=margin,
        h_max=h_max,
    )
