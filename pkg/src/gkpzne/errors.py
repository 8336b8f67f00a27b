"""Exception types shared across the package."""


class GkpZneError(Exception):
    """Base class for package errors."""


class DimensionError(GkpZneError, ValueError):
    """Invalid or mismatched Fock-space dimension."""


class CutoffTooSmallError(GkpZneError, ValueError):
    """Fock cutoff cannot hold the requested state."""


class NotHermitianError(GkpZneError, ValueError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NotPSDError(GkpZneError, ValueError):
    """Matrix expected to be positive semidefinite has a negative eigenvalue."""


class DegenerateEnvelopeError(GkpZneError, ValueError):
    """Lattice truncation retained no terms."""


class CollinearCodewordsError(GkpZneError, ValueError):
    """Raw codewords are numerically collinear (envelope too wide)."""


class CalibrationError(GkpZneError, RuntimeError):
    """Envelope calibration could not bracket or converge on the target energy."""


class PipelineError(GkpZneError, RuntimeError):
    """Numerical instability inside the encode/noise/recover/decode chain."""


class ScheduleError(GkpZneError, ValueError):
    """Energy schedule violates its constraints."""


class FitError(GkpZneError, RuntimeError):
    """Nonlinear least-squares fit could not be performed."""
