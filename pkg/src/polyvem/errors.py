"""Exception hierarchy shared across the package."""


class PolyVemError(Exception):
    """Base class for all errors raised by polyvem."""


class DegenerateElement(PolyVemError):
    pass


class TriangulationFailure(PolyVemError):
    pass


class EmptySeedSet(PolyVemError):
    pass


class MeshingFailure(PolyVemError):
    def __init__(self, message, seed_index=None):
        super().__init__(message)
        self.seed_index = seed_index


class Unsupported(PolyVemError):
    pass


class ConstitutiveSingularity(PolyVemError):
    pass


class UnmatchedConstraint(PolyVemError):
    pass


class ConstraintConflict(PolyVemError):
    pass


class DimensionError(PolyVemError, ValueError):
    pass


class SolveFailure(PolyVemError):
    """Raised when the reduced system cannot be factorized or solved.

    ``null_space_dim`` is an estimate of the number of zero-energy modes left
    in the system; a value of 3 for elasticity usually means the model has no
    essential constraints at all.
    """

    def __init__(self, message, null_space_dim=None):
        super().__init__(message)
        self.null_space_dim = null_space_dim


class NormUndefined(PolyVemError):
    pass


class MeshFormatError(PolyVemError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeshIndexError(MeshFormatError, IndexError):
    pass
