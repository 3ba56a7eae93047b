from micro_reynolds.oracle.bvp import BvpLoad, BvpSolution, oracle_coefficients, solve_bvp
from micro_reynolds.oracle.check import (
    adjudicate_phi2,
    default_sweep,
    oracle_profile_check,
    oracle_sweep,
)
