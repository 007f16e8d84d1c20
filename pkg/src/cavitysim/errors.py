"""Exception and warning types shared across the package."""


class CavitySimError(Exception):
    """Base class for all package errors."""


class EmptySectorError(CavitySimError):
    """No basis configuration satisfies the requested excitation weight."""


class CutoffTooSmallError(CavitySimError):
    """The requested total weight exceeds what the mode cutoffs admit."""


class WeightMismatchError(CavitySimError):
    """Operator weight change is inconsistent with the sector pair."""


class OverOccupiedError(CavitySimError):
    """Collective occupation exceeds the atom number in exact mode."""


class DegenerateBasisError(CavitySimError):
    """Polariton basis is undefined (B = 0)."""


class FrameError(CavitySimError):
    """A rotating-frame term retains an absolute optical frequency."""


class ResonanceError(CavitySimError):
    """A lattice-sum denominator hits the dispersion band."""


class StiffnessBudgetError(CavitySimError):
    """Required integrator steps exceed the configured cap."""


class ZeroNormCollapseError(CavitySimError):
    """All collapse channels have zero rate at a jump event."""


class DimensionCapError(CavitySimError):
    """Dense master-equation oracle dimension cap exceeded."""


class GridMismatchError(CavitySimError):
    """Two observable series do not share a time grid."""


class NoConvergenceError(CavitySimError):
    """Self-consistent iteration failed to converge."""


class ConfigError(CavitySimError):
    """Scenario configuration is malformed or incomplete."""


class BudgetExceededError(CavitySimError):
    """Pre-flight resource estimate exceeds the configured budget."""


class RegimeViolationWarning(UserWarning):
    """A perturbative validity inequality is not comfortably satisfied."""
