"""Exception hierarchy shared by all modules."""


class AthermalityError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(AthermalityError):
    """Matrix fails the Hermitian symmetry check."""


class DimMismatch(AthermalityError):
    """Operands have incompatible dimensions."""


class DimNot2(DimMismatch):
    """Operation is defined for qubits only."""


class InvalidState(AthermalityError):
    """Matrix is not a valid density matrix (trace, Hermiticity or positivity)."""


class InvalidM(AthermalityError):
    """Golden-unit parameter must exceed 1."""


class BetaMismatch(AthermalityError):
    """Composite operations require a common inverse temperature."""


class InvalidChoi(AthermalityError):
    """Matrix is not a valid Choi matrix of a channel."""


class ZeroDiagonal(AthermalityError):
    """Source state has a vanishing diagonal entry where the target does not."""


class DiagonalMismatch(AthermalityError):
    """Source and target diagonals differ where equality is required."""


class PreconditionViolated(AthermalityError):
    """A structural precondition (Bohr spectrum, nonzero off-diagonals, ...) fails."""


class ZeroGibbsComponent(AthermalityError):
    """Gibbs vector has a zero entry carrying nonzero paired mass."""


class EpsOutOfRange(AthermalityError):
    """Smoothing parameter outside [0, 1)."""


class UnsupportedSmoothing(AthermalityError):
    """Smoothed quantity requested for a non-commuting input."""


class SupportViolation(AthermalityError):
    """Reference state vanishes on part of the support of the primary state."""


class TooLarge(AthermalityError):
    """Type enumeration would exceed the supported problem size."""


class EmptyTypicalSet(AthermalityError):
    """Typical-set truncation retained no types at the requested size."""


class NotProductPure(AthermalityError):
    """Input is not a normalized product-pure amplitude vector."""


class LPNumericalFailure(AthermalityError):
    """The linear-program backend failed to return a usable solution."""


class StateFileError(AthermalityError):
    """State file does not parse against the JSON schema."""
