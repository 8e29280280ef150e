"""Exceptions raised by the crane toolkit."""


class CraneError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameters(CraneError, ValueError):
    """Physical parameters or inputs violate their invariants."""


class SingularConfiguration(CraneError):
    """The mass matrix (or the hoist feedforward denominator) is numerically singular."""


class Uncontrollable(CraneError):
    """The pair (A, B) fails the Kalman rank test."""


class PlacementFailed(CraneError):
    """Eigenstructure assignment could not reach the requested poles."""


class NotHurwitz(CraneError):
    """A closed-loop matrix has an eigenvalue with non-negative real part."""


class NoValidRadius(CraneError):
    """Even the smallest tested ball fails the Lyapunov decrease condition."""


class EmptyTrajectory(CraneError, ValueError):
    """A trajectory has too few samples for the requested metric."""


class StepSizeUnderflow(CraneError):
    """The adaptive integrator step fell below floating-point resolution."""


class TrajectoryDiverged(CraneError):
    """The state left the configured bound or became non-finite."""
