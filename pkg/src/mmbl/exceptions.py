"""Exception types shared across the solver."""


class MmblError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(MmblError):
    """Invalid configuration: bad file, bad key, violated parameter constraint."""


class AdmissibilityError(MmblError):
    """The band delta <= q1 <= P - delta (or a precondition derived from it) failed.

    Carries the first offending location when known.
    """

    def __init__(self, message, *, time=None, ix=None, iy=None, iteration=None):
        super().__init__(message)
        self.time = time
        self.ix = ix
        self.iy = iy
        self.iteration = iteration


class DegeneracyError(MmblError):
    """Tangential magnetic field dropped below delta: stream map not invertible."""


class TransformRangeError(MmblError):
    """Requested target coordinate lies outside the image of the stream map."""


class SingularOperatorError(MmblError):
    """Tridiagonal pivot below threshold; usually signals admissibility loss."""


class NonContractionError(MmblError):
    """Picard ratios stayed >= 1; the time window is too long."""


class SchemaError(MmblError):
    """Unknown or incompatible version header in a persisted file."""
