"""
Exception hierarchy for wavefront-kdv

ConfigError maps to CLI exit code 2; every other WavefrontError maps to 3.
"""


class WavefrontError(Exception):
    """Base class for all toolkit errors"""
    pass


class ConfigError(WavefrontError, ValueError):
    """Raised when a run configuration is malformed or out of range"""

    def __init__(self, message: str, keys=None):
        super().__init__(message)
        self.keys = list(keys or [])


class NumericError(WavefrontError, ArithmeticError):
    """A numerical procedure failed or produced unusable values"""
    pass


class ContractError(WavefrontError, ValueError):
    """An operation was called outside its preconditions"""
    pass


# Numeric failures
class NonFiniteMultiplier(NumericError):
    """A Fourier multiplier is NaN or infinite at some lattice frequency"""
    pass


class NonFinite(NumericError):
    """Samples or states blew up to NaN/Inf"""
    pass


class StabilityViolation(NumericError):
    """Time step exceeds the interaction-step stability guard"""
    pass


class StepUnderflow(NumericError):
    """Adaptive step size collapsed"""
    pass


class NoConvergence(NumericError):
    """An iteration stalled above its tolerance"""
    pass


class UnderResolved(NumericError):
    """Quadrature grid cannot resolve the oscillation e^{-iy xi}"""
    pass


class UnderResolvedWindow(NumericError):
    """Scaled window is narrower than the grid guard"""
    pass


class EnergyLawViolation(NumericError):
    """Solver norm drifted from ||u0||^2 - int int a_x |u|^2 beyond tolerance"""
    pass


class BoundaryContamination(NumericError):
    """Solution reached the periodic box edge"""
    pass


# Contract violations
class GridMismatch(ContractError):
    """Fields live on different grids"""
    pass


class ZeroNonlinearity(ContractError):
    """Soliton ratio requested with a vanishing nonlinear coefficient"""
    pass


class UnsupportedDerivative(ContractError):
    """Derivative order above what the coefficient declares"""
    pass


class NotASoliton(ContractError):
    """Operation needs a soliton coefficient"""
    pass


class UnknownSupport(ContractError):
    """Closure data without a declared support radius"""
    pass


class NoSpectralClosure(ContractError):
    """Spectral path requested for data without an analytic transform"""
    pass


class GridTooCoarse(ContractError):
    """Phase-space grid too sparse for the inversion formula"""
    pass


class SweepTooShort(ContractError):
    """Lambda sweep has too few samples for a fit"""
    pass


class CalibrationGapTooSmall(ContractError):
    """Smooth and singular exponents are not separated enough"""
    pass
