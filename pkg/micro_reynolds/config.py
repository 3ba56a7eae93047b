import json
from typing import Literal, TextIO

import numpy as np
import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from micro_reynolds.errors import ParseError, ValidationError
from micro_reynolds.model.params import FluidParams
from micro_reynolds.model.roughness import RoughnessProfile
from micro_reynolds.reynolds.solver import MacroDomain


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class FluidBlock(_Block):
    """Dimensionless fluid parameters."""

    N2: float
    Rc: float
    alpha: float
    beta: float
    s: tuple[float, float] = (0.0, 0.0)

    @field_validator("N2")
    @classmethod
    def _n2(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("must lie in (0,1)")
        return v

    @field_validator("Rc", "beta")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("must be positive")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha(cls, v: float, info: ValidationInfo) -> float:
        N2 = info.data.get("N2")
        upper = np.inf if N2 is None else (1.0 / N2) * (1 + 1e-12)
        if not 0.0 < v <= upper:
            raise ValueError("must lie in (0, 1/N2]")
        return v

    @field_validator("s")
    @classmethod
    def _finite(cls, v: tuple[float, float]) -> tuple[float, float]:
        if not all(np.isfinite(v)):
            raise ValueError("must be finite")
        return v

    def to_params(self) -> FluidParams:
        return FluidParams(N2=self.N2, Rc=self.Rc, alpha=self.alpha, beta=self.beta, s=self.s)


class RoughnessBlock(_Block):
    """Film thickness over the roughness cell."""

    kind: Literal["constant", "cosine", "sampled"]
    h0: float = 1.0
    a: tuple[float, float] = (0.0, 0.0)
    phase: tuple[float, float] = (0.0, 0.0)
    # nodal values, row-major with z2 as the slow index
    values: list[list[float]] | None = Field(default=None, validate_default=True)

    @field_validator("h0")
    @classmethod
    def _h0(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("must be positive")
        return v

    @field_validator("a")
    @classmethod
    def _a(cls, v: tuple[float, float], info: ValidationInfo) -> tuple[float, float]:
        h0 = info.data.get("h0")
        if h0 is not None and not h0 > abs(v[0]) + abs(v[1]):
            raise ValueError("must satisfy |a1|+|a2| < h0")
        return v

    @field_validator("values")
    @classmethod
    def _values(cls, v: list[list[float]] | None, info: ValidationInfo):
        if info.data.get("kind") != "sampled":
            if v is not None:
                raise ValueError("only allowed for the sampled roughness")
            return v
        if v is None:
            raise ValueError("required for the sampled roughness")
        grid = np.asarray(v, dtype=float)
        if grid.ndim != 2 or grid.shape[0] != grid.shape[1] or grid.shape[0] < 4:
            raise ValueError("must be a square n x n grid with n >= 4")
        if not np.all(np.isfinite(grid)) or grid.min() <= 0:
            raise ValueError("must be positive and finite")
        return v

    def to_profile(self) -> RoughnessProfile:
        match self.kind:
            case "constant":
                return RoughnessProfile.constant(self.h0)
            case "cosine":
                return RoughnessProfile.cosine(self.h0, self.a, self.phase)
            case "sampled":
                return RoughnessProfile.sampled(np.asarray(self.values, dtype=float))


class CellBlock(_Block):
    n: int = Field(default=64, ge=8)


class MacroBlock(_Block):
    Lx: float = Field(default=1.0, gt=0)
    Ly: float = Field(default=1.0, gt=0)
    mx: int = Field(default=32, ge=8)
    my: int = Field(default=32, ge=8)
    solver: Literal["direct", "gmres"] = "direct"
    # relative tolerance of the krylov solver
    tol: float = Field(default=1e-12, gt=0)

    def to_domain(self) -> MacroDomain:
        return MacroDomain(self.Lx, self.Ly, self.mx, self.my)


class OracleBlock(_Block):
    M: int = Field(default=2048, ge=32)
    # `default` for the reference sweep, `config` for the configured fluid over h_min, h_mean, h_max.
    sweep: Literal["default", "config"] = "default"
    richardson: bool = True


class OutputBlock(_Block):
    directory: str = "out"
    formats: list[Literal["csv", "json"]] = ["csv", "json"]


class FlagsBlock(_Block):
    phi2_variant: Literal["auto", "A1", "A2"] = "auto"


class TolerancesBlock(_Block):
    oracle: float = Field(default=1e-6, gt=0)
    cell_residual: float = Field(default=1e-10, gt=0)
    reynolds_residual: float = Field(default=1e-10, gt=0)


class RunConfig(_Block):
    """Configurations for a model run."""

    fluid: FluidBlock
    roughness: RoughnessBlock
    cell: CellBlock = CellBlock()
    macro: MacroBlock = MacroBlock()
    oracle: OracleBlock = OracleBlock()
    output: OutputBlock = OutputBlock()
    flags: FlagsBlock = FlagsBlock()
    tolerances: TolerancesBlock = TolerancesBlock()

    @classmethod
    def from_dict(cls, loaded) -> "RunConfig":
        """Validate a decoded document.
        Raises:
            ValidationError: naming the first offending key and its constraint.
        """
        try:
            return cls.model_validate(loaded)
        except pydantic.ValidationError as e:
            raise _convert(e) from None

    @classmethod
    def parse(cls, text: str | bytes) -> "RunConfig":
        """Parse and validate a JSON document.
        Args:
            text: UTF-8 document.
        Returns:
            the validated configuration.
        Raises:
            ParseError: on malformed documents, with line and column.
            ValidationError: naming the offending key and constraint.
        """
        if isinstance(text, bytes):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(1, e.start + 1, "document is not UTF-8") from None
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(e.lineno, e.colno, e.msg) from None
        return cls.from_dict(loaded)

    @classmethod
    def load_from_json(cls, path: str) -> "RunConfig":
        """Load a configuration from the given json file.
        Args:
            path: a path to the json file.
        Returns:
            the loaded configuration.
        Raises:
            ParseError: if the file cannot be read or is malformed.
        """
        return cls.parse(_read(path))

    @classmethod
    def load_from_yaml(cls, path: str) -> "RunConfig":
        """Load a configuration from the given yaml file.
        Args:
            path: a path to the yaml file.
        Returns:
            the loaded configuration.
        Raises:
            ParseError: if the file cannot be read or is malformed.
        """
        try:
            text = _read(path).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(1, e.start + 1, "document is not UTF-8") from None
        try:
            loaded = yaml.safe_load(text)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            line, column = (0, 0) if mark is None else (mark.line + 1, mark.column + 1)
            raise ParseError(line, column, str(e.problem)) from None
        return cls.from_dict(loaded)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        """Load by the file extension, yaml for `.yaml`/`.yml`, json otherwise."""
        if path.endswith((".yaml", ".yml")):
            return cls.load_from_yaml(path)
        return cls.load_from_json(path)

    def dump(self, f: TextIO):
        """Dump the resolved configuration to the yaml file.
        Args:
            f: writing stream.
        """
        yaml.safe_dump(self.model_dump(mode="json"), f, sort_keys=False)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise ParseError(0, 0, f"cannot read {path}: {e.strerror or e}") from None


def _convert(e: pydantic.ValidationError) -> ValidationError:
    err = e.errors()[0]
    key = ".".join(str(loc) for loc in err["loc"]) or "<document>"
    match err["type"]:
        case "extra_forbidden":
            return ValidationError(key, "is not a recognized key")
        case "missing":
            return ValidationError(key, "is required")
        case "value_error":
            return ValidationError(key, str(err["ctx"]["error"]))
        case _:
            return ValidationError(key, err["msg"].lower())
