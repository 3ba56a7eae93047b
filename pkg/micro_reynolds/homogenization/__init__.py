from micro_reynolds.homogenization.cell import (
    CellSolution,
    FlowFactors,
    flow_factors,
    laminate_bounds,
    sample_quadrature,
    solve_correctors,
)
from micro_reynolds.homogenization.fem import QuadMesh
