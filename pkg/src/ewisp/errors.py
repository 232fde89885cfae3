"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, parameter set or configuration file."""


class BlowUpError(ArithmeticError):
    """A non-finite value appeared in the numerical solution."""

    def __init__(self, step: int, time: float):
        self.step = step
        self.time = time
        super().__init__(f"non-finite solution at step {step} (t={time:.6g})")
