"""Exception hierarchy shared across the pipeline.

Every domain failure raises a named subclass of :class:`EmissionscopeError`
so the CLI can surface the error name without flattening it into a generic
message.
"""


class EmissionscopeError(Exception):
    """Base class for all domain errors raised by this package."""


# --- ingestion ---------------------------------------------------------


class MalformedHeader(EmissionscopeError):
    """CSV header does not match the expected schema."""


class NonMonotonicTime(EmissionscopeError):
    """Timestamps are not strictly increasing."""


class RangeViolation(EmissionscopeError):
    """A value lies outside the instrument's full-scale range."""


class EmptyStream(EmissionscopeError):
    """Input contains a header but no data rows, or nothing at all."""


class MalformedRow(EmissionscopeError):
    """A data row has the wrong field count or an unparseable numeric."""


class TimingGap(EmissionscopeError):
    """Successive sample intervals deviate more than 20% from nominal."""


class MissingChannel(EmissionscopeError):
    """A required gas channel is absent from the series."""


class UnitMismatch(EmissionscopeError):
    """Channels that must share a unit do not."""


# --- windowing ---------------------------------------------------------


class SeriesTooShort(EmissionscopeError):
    """Series has fewer samples than one window."""


class EmptyWindow(EmissionscopeError):
    """Feature extraction was asked to run on an empty window."""


class AllWindowsDropped(EmissionscopeError):
    """Every window was dropped by the label gap rule."""


class NoTemporalOverlap(EmissionscopeError):
    """Sensor and emission streams do not overlap in time."""


# --- models ------------------------------------------------------------


class DegenerateDesign(EmissionscopeError):
    """Design matrix has zero rows or zero columns."""


class DimensionMismatch(EmissionscopeError):
    """Input shape does not match the model."""


class NonFiniteLoss(EmissionscopeError):
    """Training loss became non-finite (divergence)."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class EmptyDataset(EmissionscopeError):
    """Fit was called with no rows."""


# --- metrics / experiment ---------------------------------------------


class LengthMismatch(EmissionscopeError):
    """Actual and predicted vectors differ in length."""


class TooFewRows(EmissionscopeError):
    """Dataset too small for the requested split."""


class EmptyInput(EmissionscopeError):
    """An operation received an empty collection."""


class InvalidConfig(EmissionscopeError):
    """A configuration object violates its invariants."""
