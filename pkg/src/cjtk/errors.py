"""Exception types and validation findings shared across the toolkit.

Every error and finding carries a stable machine-readable ``code`` (an
UPPER_SNAKE string such as ``VERTEX_INDEX_OUT_OF_RANGE``) plus a
slash-separated ``path`` locating the offending member from the document
root.
"""

from __future__ import annotations

from dataclasses import dataclass


class CjtkError(Exception):
    """Base error with a stable code and an optional document path."""

    def __init__(self, code: str, message: str, path: str | None = None):
        self.code = code
        self.message = message
        self.path = path
        if path:
            super().__init__(f"{code} at {path}: {message}")
        else:
            super().__init__(f"{code}: {message}")


class CodecError(CjtkError):
    """Raised by the reader/writer; carries a line/column for syntax errors."""

    def __init__(self, code, message, path=None, line=None, column=None):
        super().__init__(code, message, path)
        self.line = line
        self.column = column


class GmlImportError(CjtkError):
    """Raised by the CityGML importer."""


class ExtensionError(CjtkError):
    """Raised when an extension file cannot be loaded."""


ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, order=True)
class Finding:
    """One validation observation.

    Sort order is (path, code), which is the report order; ``stage`` names
    the validation layer that produced it (syntax, structure, consistency,
    extension).
    """

    path: str
    code: str
    severity: str = ERROR
    message: str = ""
    stage: str = "structure"

    def to_json(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message,
                "severity": self.severity, "stage": self.stage}
