"""Exception hierarchy shared by the solver modules and the CLI."""


class FsiError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FsiError, ValueError):
    """Invalid geometry, physics or run configuration.

    ``errors`` holds every problem found, not only the first one.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class CompatibilityError(ConfigurationError):
    """Initial data violate the compatibility conditions between layers."""


class MeshError(FsiError):
    """Fluid and solid meshes do not conform along the interface."""


class DomainDegeneracyError(FsiError):
    """The deformed fluid channel has (nearly) collapsed.

    Carries where it happened, the offending radius and, when raised by the
    time loop, the time at which the walls touched.
    """

    def __init__(self, message, *, location=None, value=None, time=None):
        super().__init__(message)
        self.location = location
        self.value = value
        self.time = time


class SolverError(FsiError):
    """Sparse factorization failed or the residual tolerance was not met."""


class NullspaceError(SolverError):
    """The saddle-point system admits a constant-pressure null mode."""


class PreconditionError(FsiError, ValueError):
    """An input violates the documented precondition of an operation."""


class StageMismatchError(FsiError):
    """An energy was requested with a weight that does not match the stage."""
