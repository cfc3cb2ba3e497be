"""Exception hierarchy shared by every bernquant module."""


class BernquantError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BernquantError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(BernquantError, ValueError):
    """A configuration file or CLI flag failed validation.

    ``problems`` holds one ``"field: message"`` string per violation.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PreconditionError(BernquantError, ValueError):
    """A documented precondition (e.g. the minimum degree) does not hold."""


class CoefficientOverflow(BernquantError):
    """Bernstein coefficients reached magnitude 1, so one-bit quantization is unstable."""

    def __init__(self, inf_norm, message=None):
        self.inf_norm = float(inf_norm)
        super().__init__(
            message or f"coefficient sup-norm {self.inf_norm:.6g} >= 1; increase n or lower mu"
        )


class StabilityOverflow(BernquantError):
    """The sigma-delta state exceeded its bound.

    Attributes
    ----------
    fiber : tuple of int
        Multi-index of the offending fiber (all coordinates except the scan axis).
    step : int
        Position along the scan axis where the bound was first exceeded.
    value : float
        The offending state value.
    """

    def __init__(self, fiber, step, value, bound):
        self.fiber = tuple(int(i) for i in fiber)
        self.step = int(step)
        self.value = float(value)
        self.bound = float(bound)
        super().__init__(
            f"sigma-delta state |u|={abs(self.value):.6g} exceeded bound {self.bound:g} "
            f"at step {self.step} of fiber {self.fiber}"
        )


class ResourceCapExceeded(BernquantError):
    """A construction would exceed a configured size cap."""


class AlphabetViolation(BernquantError, ValueError):
    """A weight or bias is not a level of the declared alphabet."""


class NetFormatError(BernquantError, ValueError):
    """A serialized network or tensor file is malformed."""


class InfeasibleParameters(BernquantError, ValueError):
    """Product-block parameters (delta, range exponent) violate the well-definedness inequality."""
