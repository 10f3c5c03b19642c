"""Exception and warning types raised by dopg."""


class DopgError(Exception):
    """Base class for all dopg errors."""


class ParameterError(DopgError, ValueError):
    """An argument is outside the admissible parameter range."""


class DomainError(DopgError, ValueError):
    """A point or argument lies outside the domain of a function."""


class EvaluationError(DopgError, ArithmeticError):
    """A singular factor was evaluated at its singular endpoint."""


class AssemblyError(DopgError, RuntimeError):
    """An assembled operator violates a structural invariant."""


class DecompositionError(DopgError, RuntimeError):
    """A generalized eigendecomposition could not be computed."""


class ResonanceError(DopgError, RuntimeError):
    """A mode of the Kronecker system is singular."""


class SizeGuardError(DopgError, MemoryError):
    """A dense solve was refused because the system is too large."""


class QuadratureWarning(UserWarning):
    """The order quadrature is below the recommended point count."""


class ConditioningWarning(UserWarning):
    """The reconstructed real solution carries a large imaginary residue."""
