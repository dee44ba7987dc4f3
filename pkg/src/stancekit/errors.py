"""Exception hierarchy shared across the toolkit.

Every error that a pipeline stage can raise has its own class so that the
CLI and the annotation service can map failures to machine-readable codes.
"""


class StancekitError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- label algebra ---------------------------------------------------------

class UndefinedComposition(StancekitError):
    """Composing a None-labeled explicit object with a nonzero alignment."""


class UndefinedAlignment(StancekitError):
    """Deriving an alignment from a None-labeled explicit object toward a polar target."""


# --- corpus ingestion ------------------------------------------------------

class MissingColumn(StancekitError):
    pass


class UnmappedLabel(StancekitError):
    pass


class EncodingError(StancekitError):
    pass


class InsufficientDiversity(StancekitError):
    """No irrelevant target could be drawn within the retry bound."""


# --- enrichment ------------------------------------------------------------

class NoDisalignedObject(StancekitError):
    """All labeled explicit objects align with the specified target."""


class LengthMismatch(StancekitError):
    pass


# --- model -----------------------------------------------------------------

class DimensionMismatch(StancekitError):
    pass


class FileUnreadable(StancekitError):
    pass


class NonFiniteLoss(StancekitError):
    """Raised with the epoch/batch location when the training loss diverges."""


# --- evaluation ------------------------------------------------------------

class EmptyAfterFiltering(StancekitError):
    """2-class evaluation requested but every gold label is None."""


class SizeExceedsPool(StancekitError):
    pass


# --- service / CLI ---------------------------------------------------------

class UnknownSession(StancekitError):
    pass


class DuplicateVote(StancekitError):
    pass


class InvalidLabel(StancekitError):
    pass


class UnknownCommand(StancekitError):
    pass


class ConfigError(StancekitError):
    pass
