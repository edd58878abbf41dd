"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad dimensions, non-positive constants, etc."""


class ParseError(ConfigError):
    """Config-file parse failure, carrying the offending key and line number."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        loc = []
        if key is not None:
            loc.append(f"key '{key}'")
        if line is not None:
            loc.append(f"line {line}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)
        self.key = key
        self.line = line


class AssumptionViolation(ValueError):
    """A sampled point falsifies one of the growth-bound assumptions."""


class IntegrationError(RuntimeError):
    """Integration produced a non-finite state.

    When raised from ``simulate`` the partial trajectory accumulated so far
    is attached as ``trajectory``.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class HorizonWarning(UserWarning):
    """Configured horizon T does not strictly exceed the analytic floor T_min."""


class AnnulusWarning(UserWarning):
    """Trajectory left the annulus on which the bounds profile is certified."""
