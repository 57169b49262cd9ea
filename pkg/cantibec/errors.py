"""Exception hierarchy.

Every error carries a machine-readable ``category`` and the exit code the
CLI returns for it: 1 for configuration problems, 2 for physics-level
failures, 3 for I/O.
"""


class CantibecError(Exception):
    """Base class for all cantibec failures."""

    category = "internal"
    exit_code = 2


class ConfigError(CantibecError):
    category = "config"
    exit_code = 1


class ConfigParseError(ConfigError):
    """Malformed config text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValidationError(ConfigError):
    """Well-formed config with an invalid or unknown key."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        if key is not None and key not in message:
            message = f"{key}: {message}"
        super().__init__(message)


class PhysicsError(CantibecError):
    category = "physics"
    exit_code = 2


class PotentialDomainError(PhysicsError):
    """Evaluation inside the cantilever slab or at a surface singularity."""

    category = "domain"


class ConvergenceError(PhysicsError):
    """A root finder or minimizer failed after bracketing."""

    category = "convergence"


class TrapVanishedError(PhysicsError):
    category = "vanished"


class OverDrivenError(PhysicsError):
    """The trap disappears at an extreme of the cantilever stroke."""

    category = "over-driven"


class NeverVanishesError(PhysicsError):
    category = "never-vanishes"


class TargetUnreachableError(PhysicsError):
    """A calibration or matching target lies outside the attainable range."""

    category = "unreachable"

    def __init__(self, message: str, attainable: tuple[float, float] | None = None):
        self.attainable = attainable
        if attainable is not None:
            message = f"{message} (attainable range {attainable[0]:.4g} .. {attainable[1]:.4g})"
        super().__init__(message)


class UnconstrainedFitError(PhysicsError):
    """The residual is flat over the search interval."""

    category = "unconstrained"


class TimeStepError(PhysicsError):
    category = "time-step"


class OutputError(CantibecError):
    category = "io"
    exit_code = 3
