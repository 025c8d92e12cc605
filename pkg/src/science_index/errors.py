"""Exception hierarchy shared across the package."""


class ScienceIndexError(Exception):
    """Base class for all errors raised by this package."""


# --- model fitting / prediction ---

class InsufficientData(ScienceIndexError):
    """Fewer observations than model parameters."""


class SingularSystem(ScienceIndexError):
    """Normal equations could not be solved (Cholesky failure)."""


class DimensionMismatch(ScienceIndexError):
    """Feature vector does not match the model's configured feature set."""


class NoObservations(ScienceIndexError):
    """Requested statistics from an empty accumulator."""


# --- scoring / calibration ---

class NoSharers(ScienceIndexError):
    """Calibration over a population in which nobody has shared data."""


class Unreachable(ScienceIndexError):
    """Calibration target cannot be reached (score saturates below it)."""


class MalformedModel(ScienceIndexError):
    """Model state violates its own consistency invariants."""


# --- ledger ---

class EmptyIdentifier(ScienceIndexError):
    """A score request carried an empty researcher identifier."""


class UnknownRequest(ScienceIndexError):
    """Fulfillment references a request that is not pending."""


class DuplicateRequest(ScienceIndexError):
    """Researcher already has a pending request and deduplication is on."""


class BrokenChain(ScienceIndexError):
    """Digest chain verification failed.

    Attributes
    ----------
    seq : int
        Sequence number of the first entry that fails verification.
    """

    def __init__(self, seq, message=None):
        self.seq = seq
        super().__init__(message or f"digest chain broken at seq {seq}")


class ReplayMismatch(ScienceIndexError):
    """Recomputed state diverged from the recorded log entry."""

    def __init__(self, seq, message=None):
        self.seq = seq
        super().__init__(message or f"replay diverged at seq {seq}")


# --- remote clients ---

class ClientError(ScienceIndexError):
    """Base class for remote-API failures."""


class NotFound(ClientError):
    """Identifier unknown to the remote service."""


class RateLimited(ClientError):
    """Remote service kept throttling after all retries."""


class NetworkFailure(ClientError):
    """Transport failure or unparseable response."""


class FixtureMissing(ClientError):
    """Fixture-only mode and no recorded response for this key."""


# --- ingestion ---

class SchemaMismatch(ScienceIndexError):
    """Input file header does not match the expected schema."""


class RowParseError(ScienceIndexError):
    """A data row could not be parsed (strict mode)."""


class EmptyInput(ScienceIndexError):
    """An operation received an empty collection it cannot handle."""
