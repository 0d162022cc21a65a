"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or malformed parameter input."""


class NumericalGuardError(RuntimeError):
    """A numerical sanity guard tripped (step size, negative occupation, ...)."""


class StepSizeError(NumericalGuardError):
    """Integration step exceeds the stability bound set by the fastest rate."""


class OracleGuardError(RuntimeError):
    """Fock-space oracle cannot be trusted (truncation or trace drift)."""
