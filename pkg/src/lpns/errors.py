"""Exception taxonomy shared by all lpns modules."""


class LpnsError(Exception):
    """Base class for all lpns errors."""


class ConfigurationError(LpnsError):
    """Invalid grid, parameter combination, file format, or run configuration."""


class InvariantViolation(LpnsError):
    """A field violates a structural invariant (Hermitian symmetry, solenoidality, ...)."""


class ShellRangeError(LpnsError):
    """Shell index or exponent outside the admissible range."""


class DomainError(LpnsError):
    """Argument outside the mathematical domain of a closed-form evaluator."""


class UndefinedRatioError(LpnsError):
    """A ratio diagnostic was requested for an identically zero field."""


class StepSizeError(LpnsError):
    """Time step violates the CFL bound; carries the admissible step."""

    def __init__(self, message, admissible_dt):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class DivergenceError(LpnsError):
    """Solution left the range of representable numbers during time stepping."""

    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time


class FitError(LpnsError):
    """Least-squares fit is degenerate (no usable spread in the abscissa)."""
