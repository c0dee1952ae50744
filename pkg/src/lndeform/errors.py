"""Exception types shared by the engine and the command line."""


class DocumentError(ValueError):
    """A structured document is malformed."""


class RankMismatch(DocumentError):
    pass


class DegreeOverflow(DocumentError):
    pass


class BoundMismatch(ValueError):
    """Two objects were built at incompatible truncation bounds or over different rings."""


class InternalInconsistency(AssertionError):
    """A mathematical identity that must hold failed; this signals a bug."""
