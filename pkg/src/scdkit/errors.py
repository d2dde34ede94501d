"""Exception types shared across the package."""


class ScdKitError(Exception):
    """Base class for data-level failures (bad files, short signals)."""


class InsufficientDataError(ScdKitError):
    """Input has fewer samples than the operation requires."""


class UnsupportedFormatError(ScdKitError):
    """File is recognizable but in a variant we do not handle."""


class CorruptFileError(ScdKitError):
    """File is structurally damaged; carries the byte offset of the failure."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
