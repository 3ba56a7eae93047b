from dataclasses import dataclass, field, fields, is_dataclass


class MicroReynoldsError(Exception):
    """Super class of configuration, model and solver errors."""

    # process exit code reported by the command line interface.
    exit_code: int = 1

    def describe(self) -> str:
        """Render the diagnostics into a single message."""
        return super().__str__()

    def __str__(self) -> str:
        return self.describe()

    def __reduce__(self):
        # dataclass exceptions do not populate `args`, rebuild from fields instead.
        if is_dataclass(self):
            return self.__class__, tuple(getattr(self, f.name) for f in fields(self))
        return super().__reduce__()


class RegimeWarning(UserWarning):
    """Parameters left the regime where the closed forms are evaluated."""


class AsymmetryWarning(UserWarning):
    """A flow factor that should be symmetric is not."""


@dataclass(eq=False)
class ParseError(MicroReynoldsError):
    """Error occurs during parse the configuration document."""

    line: int
    column: int
    reason: str

    exit_code = 2

    def describe(self) -> str:
        return f"ParseError: {self.reason} (line {self.line}, column {self.column})"


@dataclass(eq=False)
class ValidationError(MicroReynoldsError):
    """A configuration key violates its constraint."""

    key: str
    constraint: str

    exit_code = 2

    def describe(self) -> str:
        return f"{self.key} {self.constraint}"


@dataclass(eq=False)
class RangeError(MicroReynoldsError):
    """A model parameter lies outside of its physical range."""

    name: str
    value: float
    constraint: str

    exit_code = 2

    def describe(self) -> str:
        return f"{self.name}={self.value!r} {self.constraint}"


@dataclass(eq=False)
class BranchError(MicroReynoldsError):
    """The alpha != 1 formulas were requested on the alpha = 1 branch."""

    alpha: float
    threshold: float

    exit_code = 2

    def describe(self) -> str:
        return (
            f"alpha={self.alpha!r} is within {self.threshold:g} of 1, "
            "gamma_alpha is undefined, use the alpha=1 formulas"
        )


@dataclass(eq=False)
class DomainError(MicroReynoldsError):
    """An evaluation point lies outside of the admissible interval."""

    name: str
    value: float
    lower: float
    upper: float

    exit_code = 2

    def describe(self) -> str:
        return f"{self.name}={self.value!r} outside of [{self.lower!r}, {self.upper!r}]"


@dataclass(eq=False)
class ExistenceError(MicroReynoldsError):
    """The existence and uniqueness condition of the thin-film problem fails."""

    gamma2: float
    bound: float
    h_max: float
    suggestions: list[str] = field(default_factory=list)

    exit_code = 3

    @property
    def deficit(self) -> float:
        """How far gamma^2 exceeds the admissible bound."""
        return self.gamma2 - self.bound

    def describe(self) -> str:
        msg = (
            f"existence condition violated: gamma^2={self.gamma2!r} must be below "
            f"Rc/h_max^2*(1-N2)={self.bound!r} (h_max={self.h_max!r}, deficit={self.deficit!r})"
        )
        if self.suggestions:
            msg += "; try: " + "; ".join(self.suggestions)
        return msg


@dataclass(eq=False)
class DegenerateDenominator(MicroReynoldsError):
    """The denominator of the L-coefficient vanished."""

    denominator: float
    h: float
    branch: str
    location: tuple[float, float] | None = None

    exit_code = 4

    def describe(self) -> str:
        at = "" if self.location is None else f" at z'={self.location}"
        return (
            f"degenerate L-denominator {self.denominator!r} on the {self.branch} branch "
            f"for h={self.h!r}{at}"
        )


@dataclass(eq=False)
class SingularSystem(MicroReynoldsError):
    """The boundary-value linear system could not be solved."""

    reason: str
    residual: float | None = None

    exit_code = 4

    def describe(self) -> str:
        return f"singular oracle system: {self.reason} (residual={self.residual!r})"


@dataclass(eq=False)
class EllipticityError(MicroReynoldsError):
    """Theta_1 is not positive, the local and Reynolds problems lose ellipticity."""

    minimum: float
    h: float
    count: int = 1
    location: tuple[float, float] | None = None

    exit_code = 4

    def describe(self) -> str:
        at = "" if self.location is None else f" at z'={self.location}"
        return (
            f"theta1 must be positive, found {self.count} non-positive sample(s), "
            f"minimum {self.minimum!r} for h={self.h!r}{at}"
        )


@dataclass(eq=False)
class SolverError(MicroReynoldsError):
    """A sparse linear solve failed or did not converge."""

    solver: str
    info: int
    residual: float | None = None

    exit_code = 4

    def describe(self) -> str:
        return f"{self.solver} failed (info={self.info}, residual={self.residual!r})"


@dataclass(eq=False)
class IndefinitenessError(MicroReynoldsError):
    """The symmetric part of the flow factor K1 is not positive definite."""

    eigenvalues: tuple[float, float]

    exit_code = 4

    def describe(self) -> str:
        return f"symmetric part of K1 is not positive definite, eigenvalues={self.eigenvalues}"


@dataclass(eq=False)
class ToleranceBreach(MicroReynoldsError):
    """A reported residual or discrepancy exceeds its configured tolerance."""

    quantity: str
    value: float
    tolerance: float

    exit_code = 5

    def describe(self) -> str:
        return f"{self.quantity}={self.value!r} exceeds tolerance {self.tolerance!r}"


@dataclass(eq=False)
class InternalError(MicroReynoldsError):
    """An exception outside the model errors escaped from a numerical routine."""

    kind: str
    message: str

    exit_code = 4

    def describe(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(eq=False)
class StageError(MicroReynoldsError):
    """Wrap the error raised from a pipeline stage with the stage name."""

    stage: str
    cause: MicroReynoldsError

    def __post_init__(self):
        self.exit_code = self.cause.exit_code

    def describe(self) -> str:
        return f"[{self.stage}] {type(self.cause).__name__}: {self.cause.describe()}"
