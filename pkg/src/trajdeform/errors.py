"""Exception hierarchy for trajectory deformation operations."""


class TrajdeformError(Exception):
    """Base class for all library errors."""


class TrajectoryTooShort(TrajdeformError):
    pass


class NonUniformGrid(TrajdeformError):
    pass


class ZeroVelocitySample(TrajdeformError):
    pass


class AdmissibilityError(TrajdeformError):
    """Trajectory fails the regularity conditions required by a model."""


class SteeringSingularity(TrajdeformError):
    """Reverse equations hit a singular steering configuration."""


class EulerSingularity(TrajdeformError):
    pass


class SingularDeformation(TrajdeformError):
    """Requested deformation matrix would be singular."""


class InflectionAtTau(TrajdeformError):
    pass


class FixedPointMismatch(TrajdeformError):
    pass


class ComposeError(TrajdeformError):
    pass


class TangentThroughEndpoint(TrajdeformError):
    pass


class NoAccessibleTangent(TrajdeformError):
    pass


class InflectionOnlyMatches(TrajdeformError):
    pass


class NoTangentThroughEndpoint(TrajdeformError):
    pass


class TargetOrientationInaccessible(TrajdeformError):
    pass


class CollinearTangents(TrajdeformError):
    pass


class RootNotBracketed(TrajdeformError):
    pass


class DegenerateU(TrajdeformError):
    pass


class NoCollisionFreeWaypoint(TrajdeformError):
    pass


class IterationCapExceeded(TrajdeformError):
    pass


class StubTooShort(TrajdeformError):
    pass


class SpeedBlendInfeasible(TrajdeformError):
    pass


class ScenarioError(TrajdeformError):
    """Invalid scenario file (schema or reference problems)."""

    def __init__(self, message, field_path=None):
        super().__init__(message)
        self.field_path = field_path
