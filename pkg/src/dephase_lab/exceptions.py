"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands do not share a common Hilbert-space dimension."""


class HermiticityError(ValueError):
    """A matrix violates the Hermiticity tolerance of its contract."""


class StepSizeError(ValueError):
    """An integrator time step violates its stability precondition."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or left its stable range."""
