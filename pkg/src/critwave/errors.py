"""Exception hierarchy shared by all critwave modules."""


class CritwaveError(Exception):
    """Base class for all package errors."""


# ---- numerics kernels -------------------------------------------------------

class StepSizeUnderflow(CritwaveError):
    """Adaptive step control stalled below the minimum admissible step."""


class NonFiniteState(CritwaveError):
    """Integration state overflowed or became NaN.

    For shooting problems this usually signals a wrong shooting parameter;
    for the wave solver it is the normal terminal signal of focusing blow-up.
    """


class NoSignChange(CritwaveError):
    """Root bracket endpoints have the same sign."""


class MaxIterations(CritwaveError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class DomainError(CritwaveError):
    """Argument outside the documented domain of a special function."""


# ---- ground state / profile -------------------------------------------------

class WronskianDrift(CritwaveError):
    """The kernel-pair Wronskian invariant drifted beyond tolerance
    (signals integrator misconfiguration)."""


class OrthogonalityFailure(CritwaveError):
    """Post-correction projection of the profile correction exceeds tolerance."""


class GridTooShort(CritwaveError):
    """Radial grid does not reach the span required by the requested scale."""


# ---- coercivity -------------------------------------------------------------

class SingularBesselSystem(CritwaveError):
    """The 2x2 boundary-data solve for the Bessel combination is degenerate."""


class TailMismatch(CritwaveError):
    """Neither sign of the shooting parameter bounds the target tail law."""


class TailFitUnstable(CritwaveError):
    """Tail-correction coefficient estimates disagree beyond tolerance."""


class DecayNotEntered(CritwaveError):
    """Shot eigenfunction never entered its exponential asymptotic regime
    before the instability radius."""


# ---- dynamics ---------------------------------------------------------------

class NoDichotomy(CritwaveError):
    """Both bracket endpoints exit on the same side of the trapped regime."""


class NewtonDiverged(CritwaveError):
    """Modulation solve left its neighborhood (terminal signal for a run)."""


class CFLViolation(CritwaveError):
    """Requested time step exceeds the stability limit of the wave stepper."""


class NonMonotoneB(CritwaveError):
    """Scale parameter increased during reduced-system integration."""


# ---- CLI --------------------------------------------------------------------

class ValidationError(CritwaveError):
    """Invalid configuration value (CLI exit status 2)."""
