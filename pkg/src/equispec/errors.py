"""Exception hierarchy shared across the package."""


class EquispecError(Exception):
    """Base class for all package errors."""


class StructureError(EquispecError, ValueError):
    """A block structure violates equitability or feasibility."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "Equitability condition does not apply: " + "; ".join(self.violations)
        )


class InfeasibleError(EquispecError, ValueError):
    """Requested degrees cannot be realised by a simple graph."""


class SamplingError(EquispecError, RuntimeError):
    """The pairing sampler exhausted its restart budget."""

    def __init__(self, message, attempts):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


class ConvergenceError(EquispecError, RuntimeError):
    """The cavity iteration did not reach tolerance."""

    def __init__(self, z, iterations, residual):
        self.z = z
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"cavity iteration at z={z} did not converge in {iterations} "
            f"sweeps (residual {residual:.3e})"
        )


class SingularityError(EquispecError, ArithmeticError):
    """A denominator in the cavity update fell below the underflow guard."""


class DomainError(EquispecError, ValueError):
    """Argument outside the domain of an analytic formula."""


class EigensolverError(EquispecError, RuntimeError):
    """Dense eigensolve failed or produced inconsistent spectra."""
