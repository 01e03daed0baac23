"""Exception types shared across the toolkit."""


class GcnDiagError(Exception):
    """Base class for all toolkit errors."""


class InputError(GcnDiagError):
    """Malformed or out-of-range input: bad node ids, labels, file contents.

    Optional context attributes locate the offending datum: ``path`` and
    ``line`` for file parsing, ``index`` for in-memory sequences.
    """

    def __init__(self, message, *, path=None, line=None, index=None):
        super().__init__(message)
        self.path = path
        self.line = line
        self.index = index


class ShapeError(GcnDiagError):
    """Dimension mismatch between arrays that must agree."""
