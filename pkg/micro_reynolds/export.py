import csv
import json
import os

import numpy as np

from micro_reynolds.homogenization.cell import CellSolution, FlowFactors
from micro_reynolds.model.samples import CoefficientField
from micro_reynolds.reynolds.solver import MacroSolution


def format_float(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def write_csv(path: str, comment: str, columns: list[str], data: list[np.ndarray]):
    """Write equally sized arrays as csv columns.
    Args:
        path: a path to the csv file.
        comment: header comment, written after a leading '#'.
        columns: column names.
        data: one array per column, flattened in row-major order.
    """
    data = [np.asarray(d, dtype=float).ravel() for d in data]
    with open(path, "w", newline="") as f:
        f.write(f"# {comment}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in zip(*data):
            writer.writerow([format_float(x) for x in row])


def write_json(path: str, obj: dict):
    """Write the json document, floats in shortest round-trip form."""
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, allow_nan=True)
        f.write("\n")


def write_coefficients(path: str, field: CoefficientField):
    z1, z2 = field.points[..., 0], field.points[..., 1]
    write_csv(
        path,
        f"node-centered {field.h.shape[1]}x{field.h.shape[0]} cell grid, row-major, z2 is the slow index, "
        f"phi2 variant {field.phi2_variant}",
        ["z1", "z2", "h", "theta1", "theta2", "phi1", "phi2"],
        [z1, z2, field.h, field.theta1, field.theta2, field.phi1, field.phi2],
    )


def write_correctors(path: str, cell: CellSolution):
    nodes = cell.mesh.nodes
    write_csv(
        path,
        f"periodic {cell.n}x{cell.n} cell nodes, row-major, z2 is the slow index, zero-mean correctors",
        ["z1", "z2", "q1", "q2"],
        [nodes[:, 0], nodes[:, 1], cell.q1, cell.q2],
    )


def write_flow_factors(path: str, factors: FlowFactors, **extra):
    write_json(path, {**factors.to_dict(), **extra})


def write_pressure(path: str, sol: MacroSolution):
    rows, cols = sol.mesh.node_shape
    write_csv(
        path,
        f"{cols}x{rows} macroscopic nodes, row-major, x2 is the slow index, zero-mean pressure",
        ["x1", "x2", "p", "U1", "U2", "W1", "W2"],
        [sol.x1, sol.x2, sol.p, sol.U[..., 0], sol.U[..., 1], sol.W[..., 0], sol.W[..., 1]],
    )


def output_path(directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)
