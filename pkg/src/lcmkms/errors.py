class LcmKmsError(Exception):
    """Base class for library errors."""


class FamilyMismatch(LcmKmsError, ValueError):
    """An element does not belong to the monoid it was used with."""


class InvalidScale(LcmKmsError, ValueError):
    """Scale weights violate the defining relations or are below 1."""


class NotSupported(LcmKmsError, ValueError):
    """The requested computation has no implementation for this family/scale."""


class CertificateFailure(LcmKmsError):
    """A depth-bounded search failed to produce an object the theory promises.

    Raised when admissibility is violated inside a computation that assumes it.
    """


class InconsistencyError(CertificateFailure):
    """Internal inconsistency, e.g. no kernel pair (p, q) for a matching class."""
