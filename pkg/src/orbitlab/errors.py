"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class OrbitLabError(Exception):
    code = 4
    tag = "ERROR"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"error": self.tag, "message": str(self), "details": self.details}


class ConfigError(OrbitLabError):
    code = 1
    tag = "CONFIG_ERROR"


class NotPowerBounded(OrbitLabError):
    code = 2
    tag = "NOT_POWER_BOUNDED"


class TolAmbiguous(OrbitLabError):
    code = 3
    tag = "TOL_AMBIGUOUS"


class SylvesterIllConditioned(OrbitLabError):
    code = 3
    tag = "SYLVESTER_ILL_CONDITIONED"


class DimensionMismatch(OrbitLabError):
    tag = "DIMENSION_MISMATCH"


class HorizonExceeded(OrbitLabError):
    tag = "HORIZON_EXCEEDED"


class UnsupportedDiagonal(OrbitLabError):
    tag = "UNSUPPORTED_DIAGONAL"


class UnsupportedOperator(OrbitLabError):
    tag = "UNSUPPORTED_OPERATOR"


class ProjectionUnavailable(OrbitLabError):
    tag = "PROJECTION_UNAVAILABLE"


class NoSeparation(OrbitLabError):
    tag = "NO_SEPARATION"


class FamilyConstructionError(OrbitLabError):
    tag = "FAMILY_CONSTRUCTION"


class Exhausted(OrbitLabError):
    code = 5
    tag = "EXHAUSTED"

    def __init__(self, message="", partial=None, **details):
        super().__init__(message, **details)
        self.partial = partial


class BPViolation(OrbitLabError):
    code = 6
    tag = "BP_VIOLATION"
