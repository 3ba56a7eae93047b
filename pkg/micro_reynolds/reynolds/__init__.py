from micro_reynolds.reynolds.solver import (
    MacroDomain,
    MacroSolution,
    mass_residual,
    solve_pressure,
)
