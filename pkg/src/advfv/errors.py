"""Exception types shared across the package."""


class AdvfvError(Exception):
    """Base class for all advfv errors."""


class InvalidArgumentError(AdvfvError, ValueError):
    """Bad input value (negative concentration, out-of-range cfl, ...)."""


class UnsupportedVariantError(AdvfvError):
    """Operation not defined for the requested model variant."""


class MeshFormatError(AdvfvError):
    """Unparseable or unsupported mesh file."""


class InadmissibleMeshError(AdvfvError):
    """Mesh violates the orthogonality/positivity requirements."""


class SolverError(AdvfvError):
    """Linear solve failed its residual contract or the matrix is singular."""


class NewtonError(AdvfvError):
    """Newton iteration did not converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(AdvfvError, ValueError):
    """Invalid or incomplete simulation configuration."""
