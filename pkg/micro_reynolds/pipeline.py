import os
import traceback
from contextlib import contextmanager
from time import time

import numpy as np
from pydantic import BaseModel

from micro_reynolds import export
from micro_reynolds.config import RunConfig
from micro_reynolds.errors import InternalError, MicroReynoldsError, StageError, ToleranceBreach
from micro_reynolds.homogenization.cell import (
    flow_factors,
    laminate_bounds,
    sample_quadrature,
    solve_correctors,
)
from micro_reynolds.logger import ReportLogger
from micro_reynolds.model.coefficients import sample_field
from micro_reynolds.model.params import validate
from micro_reynolds.oracle.check import adjudicate_phi2, default_sweep, oracle_sweep
from micro_reynolds.reynolds.solver import mass_residual, solve_pressure

SUBCOMMANDS = {
    "coeffs": ("coeffs",),
    "cell": ("coeffs", "cell"),
    "solve": ("coeffs", "cell", "solve"),
    "oracle-check": ("oracle",),
    "full": ("oracle", "coeffs", "cell", "solve"),
}


class RunReport(BaseModel):
    """Summary of a pipeline run."""

    subcommand: str
    derived: dict[str, float | None] = {}
    phi2_variant: str | None = None
    phi2_adjudication: dict | None = None
    flow_factors: dict | None = None
    residuals: dict[str, float] = {}
    oracle: dict[str, float] | None = None
    timings: dict[str, float] = {}
    breaches: list[str] = []
    error: str | None = None
    exit_code: int = 0


class Pipeline:
    """Run the model stages of a configuration and export their outputs."""

    def __init__(
        self,
        config: RunConfig,
        outdir: str | None = None,
        threads: int = 1,
        phi2_variant: str | None = None,
        logger: ReportLogger | None = None,
        verbose: bool = True,
    ):
        """Initialize the pipeline.
        Args:
            config: the validated configuration.
            outdir: output directory, `config.output.directory` if not provided.
            threads: the number of worker threads.
            phi2_variant: override of `config.flags.phi2_variant`.
            logger: report logger, written into the output directory if not provided.
            verbose: whether print the logs and progress bars to the terminal or not.
        """
        self.config = config
        self.outdir = outdir or config.output.directory
        self.threads = max(1, threads)
        self.phi2_flag = phi2_variant or config.flags.phi2_variant
        self.verbose = verbose
        os.makedirs(self.outdir, exist_ok=True)
        if logger is None:
            path = os.environ.get("MICRO_REYNOLDS_LOG") or os.path.join(self.outdir, "micro-reynolds.log")
            logger = ReportLogger(path, verbose=verbose)
        self.logger = logger

        self.params = config.fluid.to_params()
        self.profile = config.roughness.to_profile()
        self.domain = config.macro.to_domain()
        # stage products
        self.variant: str | None = None
        self.factors = None

    def _path(self, name: str) -> str:
        return export.output_path(self.outdir, name)

    def _writes(self, fmt: str) -> bool:
        return fmt in self.config.output.formats

    @contextmanager
    def _stage(self, name: str, report: RunReport):
        self.logger.log({"stage": name, "event": "start"})
        start = time()
        try:
            yield
        except Exception as e:
            with open(self._path("exception.log"), "w") as f:
                f.write(traceback.format_exc())
            cause = e if isinstance(e, MicroReynoldsError) else InternalError(type(e).__name__, str(e))
            self.logger.log({"stage": name, "event": "failed", "error": str(cause)})
            raise StageError(name, cause) from e
        elapsed = time() - start
        report.timings[name] = elapsed
        self.logger.log({"stage": name, "event": "finish", "elapsed": elapsed})

    def run(self, subcommand: str) -> RunReport:
        """Run the stages of the subcommand.
        Args:
            subcommand: one of `SUBCOMMANDS`.
        Returns:
            the run report, also written to `run_report.json`.
        Raises:
            StageError: wrapping the error of the failed stage, outputs of completed stages are kept.
            ToleranceBreach: if a residual or discrepancy exceeds its tolerance.
        """
        assert subcommand in SUBCOMMANDS, f"invalid subcommand, supports `{', '.join(SUBCOMMANDS)}`"
        report = RunReport(subcommand=subcommand)
        try:
            # fail-fast, nothing is solved before the existence condition passes
            with self._stage("validate", report):
                derived = validate(self.params, self.profile.h_max)
            report.derived = {
                "k": derived.k,
                "gamma_alpha": derived.gamma_alpha,
                "gamma2": derived.gamma2,
                "bound": derived.bound,
                "existence_margin": derived.existence_margin,
                "h_min": self.profile.h_min,
                "h_max": self.profile.h_max,
            }
            self.logger.log({"derived": report.derived})
            for stage in SUBCOMMANDS[subcommand]:
                with self._stage(stage, report):
                    getattr(self, f"_{stage.replace('-', '_')}")(report)
            self._check_tolerances(report)
        except (StageError, ToleranceBreach) as e:
            report.error = str(e)
            report.exit_code = e.exit_code
            raise
        finally:
            export.write_json(self._path("run_report.json"), report.model_dump(mode="json"))
            self.logger.log(report)
        return report

    def _config_points(self) -> list:
        h_min, h_max = self.profile.h_min, self.profile.h_max
        hs = sorted({h_min, 0.5 * (h_min + h_max), h_max})
        return [(self.params, h) for h in hs]

    def _resolve_variant(self, report: RunReport, points: list | None = None) -> str:
        if self.variant is not None:
            return self.variant
        if self.phi2_flag != "auto":
            self.variant = self.phi2_flag
        elif self.params.unit_branch and (points is None or self.config.oracle.sweep == "config"):
            # both forms coincide on the alpha = 1 branch
            self.variant = "A2"
        else:
            adjudication = adjudicate_phi2(
                points or self._config_points(),
                M=self.config.oracle.M,
                tolerance=self.config.tolerances.oracle,
                richardson=self.config.oracle.richardson,
            )
            report.phi2_adjudication = {
                "selected": adjudication.selected,
                "max_error": adjudication.max_error,
                "points": adjudication.points,
                "degenerate": adjudication.degenerate,
            }
            self.variant = adjudication.selected or "A2"
            if adjudication.selected is None:
                self.logger.log(
                    f"phi2: neither variant matches the oracle ({adjudication.max_error}), using A2"
                )
        report.phi2_variant = self.variant
        self.logger.log({"phi2_variant": self.variant})
        return self.variant

    def _oracle(self, report: RunReport):
        oracle = self.config.oracle
        points = default_sweep() if oracle.sweep == "default" else self._config_points()
        variant = self._resolve_variant(report, points)
        records = oracle_sweep(
            points,
            M=oracle.M,
            phi2_variant=variant,
            richardson=oracle.richardson,
            threads=self.threads,
            verbose=self.verbose,
        )
        summary = {
            "max_relative_error": max((r.max_relative_error for r in records), default=0.0),
            "max_profile_discrepancy": max((r.profile_discrepancy for r in records), default=0.0),
            "points": float(len(records)),
        }
        report.oracle = summary
        if self._writes("json"):
            export.write_json(
                self._path("oracle_report.json"),
                {
                    "M": oracle.M,
                    "richardson": oracle.richardson,
                    "sweep": oracle.sweep,
                    "phi2_variant": variant,
                    "phi2_adjudication": report.phi2_adjudication,
                    **summary,
                    "records": [r.model_dump() for r in records],
                },
            )

    def _coeffs(self, report: RunReport):
        variant = self._resolve_variant(report)
        field = sample_field(self.profile, self.params, self.config.cell.n, self.threads, variant)
        self.logger.log(
            {
                "coeffs": {
                    "theta1_min": float(field.theta1.min()),
                    "theta1_max": float(field.theta1.max()),
                }
            }
        )
        if self._writes("csv"):
            export.write_coefficients(self._path("coefficients.csv"), field)

    def _cell(self, report: RunReport):
        n = self.config.cell.n
        qfield = sample_quadrature(self.profile, self.params, n, self.threads, self._resolve_variant(report))
        cell = solve_correctors(qfield, self.params, n, logger=self.logger)
        self.factors = flow_factors(cell, qfield, self.params)
        harmonic, arithmetic = laminate_bounds(qfield, cell.mesh)
        report.residuals["cell"] = cell.residual
        report.flow_factors = self.factors.to_dict()
        if np.any(np.asarray(self.params.s) != 0) and self.factors.symmetry_defect > 1e-10:
            self.logger.log(f"cell: K1 symmetry defect {self.factors.symmetry_defect!r} with nonzero s")
        if self._writes("csv"):
            export.write_correctors(self._path("correctors.csv"), cell)
        if self._writes("json"):
            export.write_flow_factors(
                self._path("flow_factors.json"),
                self.factors,
                theta1_harmonic_mean=harmonic,
                theta1_arithmetic_mean=arithmetic,
                cell_residual=cell.residual,
                phi2_variant=qfield.phi2_variant,
            )

    def _solve(self, report: RunReport):
        macro = self.config.macro
        sol = solve_pressure(
            self.factors, self.domain, self.params, macro.solver, macro.tol, logger=self.logger
        )
        report.residuals["reynolds"] = sol.residual
        report.residuals["mass"] = mass_residual(sol, self.domain)
        if self._writes("csv"):
            export.write_pressure(self._path("pressure.csv"), sol)

    def _check_tolerances(self, report: RunReport):
        tol = self.config.tolerances
        checks = [
            ("cell_residual", report.residuals.get("cell"), tol.cell_residual),
            ("reynolds_residual", report.residuals.get("reynolds"), tol.reynolds_residual),
            ("mass_residual", report.residuals.get("mass"), tol.reynolds_residual),
        ]
        if report.oracle is not None:
            checks += [
                ("oracle_relative_error", report.oracle["max_relative_error"], tol.oracle),
                ("oracle_profile_discrepancy", report.oracle["max_profile_discrepancy"], tol.oracle),
            ]
        breaches = [
            ToleranceBreach(name, value, limit)
            for name, value, limit in checks
            if value is not None and not value <= limit
        ]
        report.breaches = [str(b) for b in breaches]
        if breaches:
            raise breaches[0]
