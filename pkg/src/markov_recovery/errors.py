"""Exception types raised by the library.

Every validation failure raises a subclass of MarkovRecoveryError, which is a
ValueError, so callers that do not care about the distinction can still catch
the builtin type.
"""


class MarkovRecoveryError(ValueError):
    """Base class for all library errors."""


class NotSquareError(MarkovRecoveryError):
    """Matrix expected to be square is not."""


class NotHermitianError(MarkovRecoveryError):
    """Hermiticity violation exceeds the allowed tolerance."""


class NotUnitaryError(MarkovRecoveryError):
    """Unitarity violation exceeds the allowed tolerance."""


class NegativeEigenvalueError(MarkovRecoveryError):
    """A nominally positive semidefinite matrix has a genuinely negative eigenvalue."""


class DimensionMismatchError(MarkovRecoveryError):
    """Operand dimensions are inconsistent."""


class EmptyKeepSetError(MarkovRecoveryError):
    """Partial trace asked to keep no subsystem at all."""


class SpecInvalidError(MarkovRecoveryError):
    """Markov-state spectra or bases violate their invariants."""


class UnknownLabelError(MarkovRecoveryError):
    """A subsystem label is not present in the layout."""


class BadPartitionError(MarkovRecoveryError):
    """Mutual-information partition does not match the state layout."""


class BadLayoutError(MarkovRecoveryError):
    """State layout does not match what the operation requires."""


class InvalidStateError(MarkovRecoveryError):
    """Density matrix or state vector violates its invariants."""


class ReferenceTooSmallError(MarkovRecoveryError):
    """Purification reference dimension is smaller than the state rank."""


class MarginalMismatchError(MarkovRecoveryError):
    """Input marginal disagrees with the recovery-map anchor."""


class POVMInvalidError(MarkovRecoveryError):
    """POVM elements are not PSD or do not sum to the identity."""


class OptimizerBudgetExceededError(MarkovRecoveryError):
    """Planned candidate evaluations exceed the configured budget."""


class NotMarkovAtIntermediateTimeError(MarkovRecoveryError):
    """Divisibility check requested at a time where the Markov structure is not certified."""


class OffSupportWarning(UserWarning):
    """Operator handed to the recovery map has weight outside the anchor support."""
