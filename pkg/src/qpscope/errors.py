"""Exception types shared across modules."""


class ConfigError(ValueError):
    """Invalid configuration: missing field, unknown key, or violated invariant."""


class NumericsError(RuntimeError):
    """Numerical routine failed: non-convergence, regime violation, degenerate input."""
