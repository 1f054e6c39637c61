class LdgFracError(Exception):
    """Base class for errors raised by this package."""


class SingularPointEvaluation(LdgFracError, ValueError):
    """A derivative was requested exactly at a point where it blows up."""


class FractionalDomainError(LdgFracError, ValueError):
    """Fractional derivative of a power that is not defined in the Caputo sense."""


class NotInSpace(LdgFracError, ValueError):
    """The requested semi-norm variant does not apply to the function/element."""


class OutOfDomain(LdgFracError, ValueError):
    """Point outside the mesh."""


class NonFinite(LdgFracError, FloatingPointError):
    """Time stepping produced NaN or inf coefficients."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DegenerateFit(LdgFracError, ValueError):
    """Errors stopped decreasing, so a log-log slope would be meaningless."""


class InvalidForHyperbolic(LdgFracError, ValueError):
    """Quantity only defined for d > 0."""


class ConfigError(LdgFracError, ValueError):
    """Bad experiment configuration."""
