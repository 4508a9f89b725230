"""Exception hierarchy."""


class BemFemError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(BemFemError):
    pass


class DegenerateEntity(MeshError):
    pass


class NonStarShapedFace(MeshError):
    def __init__(self, message, face=None):
        super().__init__(message if face is None else f"face {face}: {message}")
        self.face = face


class CoefficientError(BemFemError):
    pass


class NonSPDDiffusion(CoefficientError):
    pass


class NegativeReaction(CoefficientError):
    pass


class BadCoefficients(CoefficientError):
    pass


class DegenerateEdge(BemFemError):
    pass


class SolverError(BemFemError):
    pass


class SolverStagnation(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class CoincidentPoints(BemFemError):
    pass


class QuadratureBreakdown(BemFemError):
    pass


class SingularV(BemFemError):
    pass


class InconsistentDimensions(BemFemError):
    pass


class IoError(BemFemError, OSError):
    pass
