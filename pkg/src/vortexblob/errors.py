"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point violates a domain-membership precondition."""


class SingularityError(ArithmeticError):
    """Evaluation at (or too close to) a kernel singularity."""


class ConfigurationError(ValueError):
    """Invalid configuration or construction parameters."""


class UndefinedCenterError(ValueError):
    """Center of vorticity requested for a blob with zero total circulation."""


class NumericalHaltError(RuntimeError):
    """An integration halted before reaching the requested final time.

    Carries the simulation time of the event and a short reason string so
    callers can report where the run stopped being trustworthy.
    """

    def __init__(self, time: float, reason: str):
        self.time = time
        self.reason = reason
        super().__init__(f"halted at t={time:.6g}: {reason}")
