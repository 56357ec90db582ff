"""Exception types shared across the package."""


class PetraceError(Exception):
    """Base class for all package-specific failures."""


class TimeStepUnderflow(PetraceError):
    """Stable time step fell below the configured floor.

    Signals imminent blow-up or exhausted spatial resolution; runs treat it
    as a normal termination reason.
    """


class DegenerateTrace(PetraceError):
    """Trace data incompatible with the profile decomposition (a(0) <= 0 or a_Z(0) >= 0)."""


class SingularWeight(PetraceError):
    """Weighted integrand blows up at z=0; the required vanishing condition fails numerically."""


class InsufficientData(PetraceError):
    """Not enough usable samples for a fit."""


class FitDegenerate(PetraceError):
    """Trajectory unsuitable for the requested regression."""


class OutOfRange(PetraceError):
    """Parameter outside the admissible interval."""


class InfeasibleBalance(PetraceError):
    """Mean-zero balancing would no longer be subordinate to the profile."""
