"""Exception types shared across the package.

Numerical failures (singular systems, failed verification, negligible
post-selection) derive from :class:`NumericalError` so the CLI can map them
to a distinct exit status.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalError(RuntimeError):
    pass


class SingularSystemError(NumericalError):
    pass


class ConditioningError(NumericalError):
    """Interpolation residual check failed."""


class VerificationError(NumericalError):
    """A compiled circuit does not reproduce its target diagonal."""


class PostSelectionError(NumericalError):
    pass


class DivisionUnderflowError(NumericalError):
    """Denominator expectation too small for a ratio estimate."""
