import json
import os
from datetime import datetime, timezone

import numpy as np

from micro_reynolds.config import RunConfig
from micro_reynolds.homogenization import flow_factors, sample_quadrature, solve_correctors
from micro_reynolds.logger import Logger
from micro_reynolds.oracle import BvpLoad, solve_bvp
from micro_reynolds.oracle.check import observed_order


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser()
    parser.add_argument("--target", default="cosine")
    parser.add_argument("--stamp", default=None)
    parser.add_argument("--cells", default="32,64,128")
    parser.add_argument("--intervals", default="512,1024,2048")
    args = parser.parse_args()
    # target benchmark
    benchmark = os.path.abspath(f"{__file__}/../../benchmark/{args.target}")
    stamp = args.stamp or datetime.now(timezone.utc).strftime("%Y.%m.%dT%H:%M")
    workdir = f"./workspace/convergence/{args.target}/{stamp}"
    os.makedirs(workdir, exist_ok=True)
    logger = Logger(os.path.join(workdir, "convergence.log"))

    path = os.path.join(benchmark, "config.json")
    if not os.path.exists(path):
        path = os.path.join(benchmark, "config.yaml")
    config = RunConfig.load(path)
    params = config.fluid.to_params()
    profile = config.roughness.to_profile()

    # cell solver, flow factors under grid doubling
    cells = [int(n) for n in args.cells.split(",")]
    K1 = []
    for n in cells:
        field = sample_quadrature(profile, params, n)
        factors = flow_factors(solve_correctors(field, params, n), field, params)
        K1.append(factors.K1.ravel())
        logger.log(f"cell n={n}: K1={factors.K1.ravel().tolist()}")

    # oracle averages under grid doubling, no extrapolation
    intervals = [int(m) for m in args.intervals.split(",")]
    averages = []
    for M in intervals:
        sol = solve_bvp(profile.h_max, params, BvpLoad(G=(1.0, 0.0), s=params.s), M)
        averages.append(np.concatenate([sol.U, sol.W]))
        logger.log(f"oracle M={M}: U={sol.U.tolist()}, W={sol.W.tolist()}")

    result = {
        "cells": cells,
        "K1": [k.tolist() for k in K1],
        "K1_order": observed_order(*K1[-3:]).tolist(),
        "intervals": intervals,
        "averages": [a.tolist() for a in averages],
        "averages_order": observed_order(*averages[-3:]).tolist(),
    }
    logger.log(f"observed orders: K1 {result['K1_order']}, oracle {result['averages_order']}")
    with open(os.path.join(workdir, "convergence.json"), "w") as f:
        json.dump(result, f, indent=2)
