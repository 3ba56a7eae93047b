from micro_reynolds.config import RunConfig
from micro_reynolds.homogenization import CellSolution, FlowFactors, flow_factors, solve_correctors
from micro_reynolds.model import (
    FluidParams,
    RoughnessProfile,
    coef_constants,
    profile,
    sample_field,
    theta_phi,
    validate,
)
from micro_reynolds.oracle import BvpLoad, oracle_coefficients, oracle_profile_check, solve_bvp
from micro_reynolds.pipeline import Pipeline, RunReport
from micro_reynolds.reynolds import MacroDomain, MacroSolution, mass_residual, solve_pressure
