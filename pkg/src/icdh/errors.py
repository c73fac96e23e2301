"""Typed errors raised across the pipeline."""


class IcdhError(Exception):
    """Base class for all package errors."""


class ParseError(IcdhError):
    """A document or file did not match its expected schema."""


class ValidationError(IcdhError):
    """Structurally valid input violated a domain invariant."""


class ProviderUnavailableError(IcdhError):
    """The external detection provider could not be reached."""


class SegmentationFailedError(IcdhError):
    """No wall region could be segmented from the image."""


class ModelFormatError(IcdhError):
    """A model file had a bad magic string, version, or checksum."""


class NotFoundError(IcdhError):
    """A referenced entity (e.g. consultation id) does not exist."""
