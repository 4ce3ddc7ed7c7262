class KitError(Exception):
    """Base class for every failure raised by the kit"""
    exit_code = 2


class ConfigError(KitError):
    """Invalid or incomplete run configuration"""
    exit_code = 1


class StructureError(KitError):
    """An assembled system failed its structure verification"""
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DimensionError(KitError, ValueError):
    """Operand shapes do not match"""


class NonFiniteError(KitError, FloatingPointError):
    """A vector picked up NaN or Inf entries"""


class MeshError(KitError, ValueError):
    """Degenerate or inconsistent mesh"""


class AsymmetricMatrixError(KitError, ValueError):
    """A matrix declared symmetric is not"""


class IndefiniteMatrixError(KitError, ValueError):
    """A matrix declared positive definite is not"""


class SingularMatrixError(KitError):
    """Structural or numerical singularity met during factorization"""

    def __init__(self, message, pivot=None):
        if pivot is not None:
            message = f'{message} (pivot {pivot})'
        super().__init__(message)
        self.pivot = pivot


class InvalidFactorizationError(KitError):
    """Solve requested on a factorization that never succeeded"""


class ConvergenceError(KitError):
    """Iterative eigen or power iteration did not converge"""


class InconsistentLagrangeError(KitError):
    """Port data violate the Lagrange relation of the bundle"""


class StepSizeUnderflowError(KitError):
    """Adaptive controller pushed the time step below its floor"""


class ConstraintViolationError(KitError):
    """Algebraic constraints drifted past tolerance after a step"""
